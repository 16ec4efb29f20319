// Writes a synthetic one-day diurnal request trace as `t,requests` CSV.

#include "brownsim/workload.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Generate a synthetic diurnal request trace"};
    brownsim::DiurnalTraceParams p;
    std::uint64_t seed = 7;
    std::string out;
    app.add_option("--intervals", p.intervals, "number of intervals")->check(CLI::PositiveNumber);
    app.add_option("--low", p.low, "requests per interval at the trough");
    app.add_option("--peak", p.peak, "requests per interval at the peak");
    app.add_option("--trough-at", p.trough_at, "interval index of the trough");
    app.add_option("--noise", p.noise, "relative Gaussian noise");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("-o,--out", out, "output file (default: stdout)");
    CLI11_PARSE(app, argc, argv);

    const auto rates = brownsim::synthesize_diurnal_trace(p, seed);
    if (out.empty()) {
        brownsim::write_trace_csv(std::cout, rates);
        return 0;
    }
    std::ofstream f(out);
    if (!f) {
        std::cerr << "cannot write " << out << "\n";
        return 1;
    }
    brownsim::write_trace_csv(f, rates);
    return 0;
}
