#include "brownsim/workload.hpp"

#include "brownsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

namespace brownsim {

double Rng::normal()
{
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_number(std::string_view s, double& out)
{
    s = trim(s);
    if (s.empty()) return false;
    // strtod handles exponents and is locale-free enough for plain CSV numbers.
    std::string buf(s);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && std::isfinite(out);
}

} // namespace

std::int64_t scale_rate(double raw, double scale)
{
    return static_cast<std::int64_t>(std::floor(raw * scale + 0.5));
}

Trace parse_trace(std::istream& in, double scale, double interval_seconds)
{
    Trace trace;
    trace.scale = scale;
    trace.interval_seconds = interval_seconds;

    std::string line;
    int line_no = 0;
    bool first_data = true;
    double last_t = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto comma = view.find(',');
        if (comma == std::string_view::npos)
            throw TraceError(fmt::format("line {}: expected two comma-separated columns", line_no));
        const auto col_t = view.substr(0, comma);
        const auto col_r = view.substr(comma + 1);
        if (col_r.find(',') != std::string_view::npos)
            throw TraceError(fmt::format("line {}: expected exactly two columns", line_no));

        double t = 0.0;
        double r = 0.0;
        const bool t_ok = parse_number(col_t, t);
        const bool r_ok = parse_number(col_r, r);
        if (!t_ok || !r_ok) {
            if (first_data && trace.rates.empty() && !t_ok && !r_ok) continue; // header
            throw TraceError(fmt::format("line {}: malformed row '{}'", line_no, std::string(view)));
        }
        if (r < 0) throw TraceError(fmt::format("line {}: negative request count", line_no));
        if (!first_data && !(t > last_t))
            throw TraceError(fmt::format("line {}: timestamps must be strictly increasing", line_no));
        first_data = false;
        last_t = t;
        trace.rates.push_back(scale_rate(r, scale));
    }
    if (trace.rates.empty()) throw TraceError("trace contains no data rows");
    return trace;
}

Trace load_trace(const std::filesystem::path& path, double scale, double interval_seconds)
{
    std::ifstream in(path);
    if (!in) throw TraceNotFound(fmt::format("cannot open trace file '{}'", path.string()));
    try {
        return parse_trace(in, scale, interval_seconds);
    } catch (const TraceError& e) {
        throw TraceError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

double predict_rate(std::span<const std::int64_t> history, int window)
{
    if (history.empty() || window < 1) return 0.0;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(window), history.size());
    double sum = 0.0;
    for (auto r : history.last(n)) sum += static_cast<double>(r);
    return sum / static_cast<double>(n);
}

double predict_rate_ewma(std::span<const std::int64_t> history, int window, double alpha)
{
    if (history.empty() || window < 1) return 0.0;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(window), history.size());
    const auto recent = history.last(n);
    double weight = 1.0;
    double num = 0.0;
    double den = 0.0;
    for (auto it = recent.rbegin(); it != recent.rend(); ++it) {
        num += weight * static_cast<double>(*it);
        den += weight;
        weight *= 1.0 - alpha;
    }
    return num / den;
}

std::vector<double> synthesize_diurnal_trace(const DiurnalTraceParams& params, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(params.intervals));
    for (int t = 0; t < params.intervals; ++t) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(t - params.trough_at) / params.intervals;
        const double shape = 0.5 - 0.5 * std::cos(phase);
        const double mean = params.low + (params.peak - params.low) * shape;
        const double value = mean * (1.0 + params.noise * rng.normal());
        out.push_back(std::max(0.0, std::round(value)));
    }
    return out;
}

void write_trace_csv(std::ostream& out, std::span<const double> raw_rates)
{
    out << "t,requests\n";
    for (std::size_t t = 0; t < raw_rates.size(); ++t) out << fmt::format("{},{:.0f}\n", t, raw_rates[t]);
}

} // namespace brownsim
