// Single runs and policy sweeps with their on-disk outputs.

#pragma once

#include "brownsim/config.hpp"
#include "brownsim/model.hpp"
#include "brownsim/qos.hpp"
#include "brownsim/workload.hpp"

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace brownsim {

// Loads the trace named by the config. Throws TraceNotFound / TraceError.
Trace load_config_trace(const SimConfig& config);

nlohmann::json result_to_json(const RunResult& result, const QosReport& qos, const SimConfig& config);

// `t,requests,active_hosts,total_power_w,overloaded_hosts,errors,deactivated`
void write_intervals_csv(std::ostream& out, const RunResult& result);

// Writes via a temporary file and a rename so readers never see half a file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Runs one simulation and writes result.json and intervals.csv into `out_dir`.
RunResult run_to_directory(const SimConfig& config, const Trace& trace, const std::filesystem::path& out_dir);

struct SweepAxis {
    // policy_name, overloaded_threshold_u_t or optional_util_pct.
    std::string name;
    std::vector<std::string> values;
};

struct ExperimentSpec {
    SimConfig base;
    std::vector<SweepAxis> axes;
    int repetitions = 1;
    std::filesystem::path output_dir;
};

struct Cell {
    SimConfig config;
    // e.g. "LUCF-40"; brownout policies carry the optional share in percent.
    std::string label;
    int repetition = 0;
    // Sub-directory of the experiment's output directory.
    std::string directory;
};

std::vector<Violation> validate_experiment(const ExperimentSpec& spec);

// Cartesian product of the axes times the repetitions, in axis order.
// Repetition r uses seed base_seed + r. Throws ConfigError on a bad axis.
std::vector<Cell> expand_cells(const ExperimentSpec& spec);

// Experiment file: {"config": <path or inline object>, "sweep": {axis: [values]},
// "repetitions": n, "output_dir": path}. Relative paths resolve against the file.
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct SummaryRow {
    std::string label;
    std::string policy;
    double overloaded_threshold = 0.0;
    double optional_util_pct = 0.0;
    int repetition = 0;
    std::uint64_t seed = 0;
    double energy_kwh = 0.0;
    std::optional<double> avg_response_ms;
    std::optional<double> p_kth_response_ms;
    int percentile_k = 95;
    std::optional<double> slavr;
    double otr_mean = 0.0;
};

SummaryRow summary_row(const std::string& label, int repetition, const nlohmann::json& result);

// Raw fractions, one row per cell.
std::string summary_csv(const std::vector<SummaryRow>& rows);
// Aligned text table in kWh, ms and percent.
std::string summary_table(const std::vector<SummaryRow>& rows);

// Runs every cell (cells in parallel, up to `jobs` at a time) and writes the
// per-cell outputs, manifest.json, summary.csv and summary.txt.
std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec, unsigned jobs = 0);

// Rebuilds summary.csv and summary.txt from an existing output directory.
std::vector<SummaryRow> report_experiment(const std::filesystem::path& output_dir);

} // namespace brownsim
