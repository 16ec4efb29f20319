// brownsim: validate configs, run single simulations and policy sweeps.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 invalid config or arguments,
// 3 trace file missing, 4 malformed trace.

#include "brownsim/config.hpp"
#include "brownsim/engine.hpp"
#include "brownsim/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <iostream>

using namespace brownsim;

namespace {

enum Exit { ok = 0, failure = 1, bad_config = 2, no_trace = 3, bad_trace = 4 };

struct CommonFlags {
    std::string config;
    std::string trace;
    std::optional<double> scale;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "JSON config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--trace", f.trace, "override the trace CSV");
    cmd->add_option("--scale", f.scale, "override the trace scale factor");
    cmd->add_option("--seed", f.seed, "override the RNG seed");
}

SimConfig load_with(const CommonFlags& f, Overrides o)
{
    auto config = load_config(f.config);
    if (!f.trace.empty()) o.trace_path = f.trace;
    o.scale = f.scale;
    o.seed = f.seed;
    apply_overrides(config, o);
    return config;
}

int report_violations(const std::vector<Violation>& violations)
{
    for (const auto& v : violations) fmt::print(stderr, "invalid: {}: {}\n", v.field, v.rule);
    return bad_config;
}

std::string optional_text(const std::optional<double>& v, double factor, const char* unit)
{
    return v ? fmt::format("{:.3f}{}", *v * factor, unit) : std::string("n/a");
}

template <typename Fn>
int guarded(Fn&& fn)
{
    try {
        return fn();
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return bad_config;
    } catch (const TraceNotFound& e) {
        fmt::print(stderr, "trace error: {}\n", e.what());
        return no_trace;
    } catch (const TraceError& e) {
        fmt::print(stderr, "trace error: {}\n", e.what());
        return bad_trace;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return failure;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Brownout data-center simulator"};
    app.require_subcommand(1);

    CommonFlags common;
    std::optional<std::string> policy;
    std::optional<double> u_threshold;
    std::optional<double> optional_pct;
    std::string out_dir;

    auto* validate = app.add_subcommand("validate", "check a config file");
    add_common(validate, common);
    validate->add_option("--policy", policy, "NPA|AUTOS|LUCF|MNCF|RSC");
    validate->add_option("--u-threshold", u_threshold, "overloaded threshold u_t");
    validate->add_option("--optional-pct", optional_pct, "optional utilization share");

    auto* run = app.add_subcommand("run", "simulate one configuration");
    add_common(run, common);
    run->add_option("--policy", policy, "NPA|AUTOS|LUCF|MNCF|RSC");
    run->add_option("--u-threshold", u_threshold, "overloaded threshold u_t");
    run->add_option("--optional-pct", optional_pct, "optional utilization share");
    run->add_option("--out", out_dir, "output directory")->required();

    std::string experiment;
    std::vector<std::string> policies;
    std::vector<std::string> thresholds;
    std::vector<std::string> pcts;
    int reps = 1;
    unsigned jobs = 0;
    auto* compare = app.add_subcommand("compare", "run a policy sweep");
    auto* exp_opt = compare->add_option("--experiment", experiment, "experiment JSON file")->check(CLI::ExistingFile);
    compare->add_option("--config", common.config, "JSON config file (instead of --experiment)")
        ->check(CLI::ExistingFile)
        ->excludes(exp_opt);
    compare->add_option("--trace", common.trace, "override the trace CSV");
    compare->add_option("--scale", common.scale, "override the trace scale factor");
    compare->add_option("--seed", common.seed, "base seed; repetition r uses seed + r");
    compare->add_option("--policy", policies, "policies to compare")->delimiter(',');
    compare->add_option("--u-threshold", thresholds, "u_t values")->delimiter(',');
    compare->add_option("--optional-pct", pcts, "optional utilization shares")->delimiter(',');
    compare->add_option("--reps", reps, "repetitions per cell")->check(CLI::PositiveNumber);
    compare->add_option("--out", out_dir, "output directory");
    compare->add_option("--jobs", jobs, "parallel cells (default: hardware threads)");

    auto* report = app.add_subcommand("report", "rebuild the summary of an earlier compare");
    report->add_option("--out", out_dir, "compare output directory")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : bad_config;
    }

    Overrides overrides;
    overrides.policy = policy;
    overrides.overloaded_threshold = u_threshold;
    overrides.optional_pct = optional_pct;

    if (*validate) {
        return guarded([&] {
            const auto config = load_with(common, overrides);
            if (auto v = validate_config(config); !v.empty()) return report_violations(v);
            fmt::print("{}: ok ({} policy, {} hosts)\n", common.config, to_string(config.policy_name),
                       config.fleet_size());
            return static_cast<int>(ok);
        });
    }

    if (*run) {
        return guarded([&] {
            const auto config = load_with(common, overrides);
            if (auto v = validate_config(config); !v.empty()) return report_violations(v);
            const auto trace = load_config_trace(config);
            const auto r = run_to_directory(config, trace, out_dir);
            fmt::print("{} seed {}: energy {:.3f} kWh, avg {}, p{} {}, SLAVR {}, OTR {:.2f}%\n", to_string(r.policy),
                       r.seed, r.energy_kwh, optional_text(r.avg_response_ms, 1.0, " ms"), r.percentile_k,
                       optional_text(r.p_kth_response_ms, 1.0, " ms"), optional_text(r.slavr, 100.0, "%"),
                       r.otr_mean * 100);
            return static_cast<int>(ok);
        });
    }

    if (*compare) {
        return guarded([&] {
            ExperimentSpec spec;
            if (!experiment.empty()) {
                spec = load_experiment(experiment);
                if (!common.trace.empty() || common.scale || common.seed) {
                    Overrides o;
                    if (!common.trace.empty()) o.trace_path = common.trace;
                    o.scale = common.scale;
                    o.seed = common.seed;
                    apply_overrides(spec.base, o);
                }
            } else if (!common.config.empty()) {
                spec.base = load_with(common, {});
                spec.output_dir = "results";
            } else {
                throw ConfigError("compare needs --experiment or --config");
            }
            // Flags add or replace sweep axes.
            auto set_axis = [&](const std::string& name, const std::vector<std::string>& values) {
                if (values.empty()) return;
                std::erase_if(spec.axes, [&](const SweepAxis& a) { return a.name == name; });
                spec.axes.push_back({name, values});
            };
            set_axis("policy_name", policies);
            set_axis("overloaded_threshold_u_t", thresholds);
            set_axis("optional_util_pct", pcts);
            if (compare->count("--reps")) spec.repetitions = reps;
            if (!out_dir.empty()) spec.output_dir = out_dir;

            if (auto v = validate_experiment(spec); !v.empty()) return report_violations(v);
            const auto rows = run_experiment(spec, jobs);
            fmt::print("{}", summary_table(rows));
            fmt::print("wrote {}\n", (spec.output_dir / "summary.csv").string());
            return static_cast<int>(ok);
        });
    }

    if (*report) {
        return guarded([&] {
            const auto rows = report_experiment(out_dir);
            fmt::print("{}", summary_table(rows));
            return static_cast<int>(ok);
        });
    }
    return failure;
}
