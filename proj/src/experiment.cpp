#include "brownsim/experiment.hpp"

#include "brownsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fmt/core.h>
#include <fstream>
#include <sstream>
#include <thread>

namespace brownsim {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_double(const std::string& text, const std::string& field)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", field, text));
    }
}

void apply_axis(SimConfig& config, const std::string& axis, const std::string& value)
{
    Overrides o;
    if (axis == "policy_name") o.policy = value;
    else if (axis == "overloaded_threshold_u_t") o.overloaded_threshold = parse_double(value, "sweep." + axis);
    else if (axis == "optional_util_pct") o.optional_pct = parse_double(value, "sweep." + axis);
    else throw ConfigError(fmt::format("unsupported sweep axis '{}'", axis));
    apply_overrides(config, o);
}

std::string cell_label(const SimConfig& c)
{
    if (!uses_brownout(c.policy_name)) return std::string(to_string(c.policy_name));
    return fmt::format("{}-{}", to_string(c.policy_name), std::llround(c.policy.optional_util_pct * 100));
}

std::string format_or_dash(const std::optional<double>& v, double factor, int decimals)
{
    return v ? fmt::format("{:.{}f}", *v * factor, decimals) : std::string("-");
}

} // namespace

Trace load_config_trace(const SimConfig& config)
{
    if (config.trace.path.empty()) throw TraceNotFound("config names no trace file");
    return load_trace(config.trace.path, config.trace.scale, config.trace.interval_seconds);
}

json result_to_json(const RunResult& r, const QosReport& qos, const SimConfig& config)
{
    json j;
    j["policy"] = std::string(to_string(r.policy));
    j["seed"] = r.seed;
    j["fleet_size"] = r.fleet_size;
    j["interval_seconds"] = r.interval_seconds;
    j["overloaded_threshold"] = config.policy.overloaded_threshold;
    j["optional_util_pct"] = config.policy.optional_util_pct;
    j["energy_kwh"] = r.energy_kwh;
    j["energy_per_host_wh"] = r.energy_per_host_wh;
    j["otr_per_host"] = r.otr_per_host;
    j["otr_mean"] = r.otr_mean;
    j["avg_response_ms"] = optional_number(r.avg_response_ms);
    j["p_kth_response_ms"] = optional_number(r.p_kth_response_ms);
    j["percentile_k"] = r.percentile_k;
    j["slavr"] = optional_number(r.slavr);
    j["total_requests"] = r.total_requests;
    j["total_errors"] = r.total_errors;
    j["active_host_series"] = r.active_host_series;

    json checks = json::array();
    for (const auto& c : qos.constraints)
        checks.push_back({{"name", c.name}, {"bound", c.bound}, {"actual", optional_number(c.actual)}, {"pass", c.pass}});
    j["qos"] = {{"constraints", checks},
                {"all_pass", qos.all_pass()},
                {"slow_request_ratio", optional_number(qos.slow_request_ratio)}};
    j["config"] = config_to_json(config);
    return j;
}

void write_intervals_csv(std::ostream& out, const RunResult& r)
{
    out << "t,requests,active_hosts,total_power_w,overloaded_hosts,errors,deactivated\n";
    for (const auto& rec : r.interval_records)
        out << fmt::format("{},{},{},{:.6f},{},{},{}\n", rec.t, rec.requests, rec.active_hosts, rec.total_power_watts(),
                           rec.overloaded_hosts(), rec.errors, rec.deactivated_containers);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        out << content;
        out.flush();
        if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

RunResult run_to_directory(const SimConfig& config, const Trace& trace, const std::filesystem::path& out_dir)
{
    auto result = run_simulation(config, trace);
    const auto qos = check_constraints(result, config.policy);
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "result.json", result_to_json(result, qos, config).dump(2) + "\n");
    std::ostringstream csv;
    write_intervals_csv(csv, result);
    write_file_atomic(out_dir / "intervals.csv", csv.str());
    return result;
}

std::vector<Violation> validate_experiment(const ExperimentSpec& spec)
{
    std::vector<Violation> out;
    if (spec.repetitions < 1) out.push_back({"repetitions", "must be >= 1"});
    for (const auto& axis : spec.axes) {
        const auto field = "sweep." + axis.name;
        if (axis.name != "policy_name" && axis.name != "overloaded_threshold_u_t" && axis.name != "optional_util_pct") {
            out.push_back({field, "unsupported axis (policy_name, overloaded_threshold_u_t, optional_util_pct)"});
            continue;
        }
        if (axis.values.empty()) out.push_back({field, "needs at least one value"});
        for (const auto& v : axis.values) {
            SimConfig probe = spec.base;
            try {
                apply_axis(probe, axis.name, v);
            } catch (const ConfigError& e) {
                out.push_back({field, e.what()});
            }
        }
    }
    if (!out.empty()) return out;

    try {
        for (const auto& cell : expand_cells(spec)) {
            for (auto v : validate_config(cell.config)) {
                v.field = cell.label + ": " + v.field;
                out.push_back(std::move(v));
            }
        }
    } catch (const ConfigError& e) {
        out.push_back({"sweep", e.what()});
    }
    return out;
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec)
{
    std::vector<SimConfig> combos{spec.base};
    for (const auto& axis : spec.axes) {
        std::vector<SimConfig> next;
        for (const auto& c : combos) {
            for (const auto& v : axis.values) {
                auto copy = c;
                apply_axis(copy, axis.name, v);
                next.push_back(std::move(copy));
            }
        }
        combos = std::move(next);
    }

    std::vector<Cell> cells;
    for (const auto& c : combos) {
        for (int r = 0; r < spec.repetitions; ++r) {
            Cell cell;
            cell.config = c;
            cell.config.policy.seed = spec.base.policy.seed + static_cast<std::uint64_t>(r);
            cell.label = cell_label(c);
            cell.repetition = r;
            cell.directory = fmt::format("{:03}_{}_ut{}_r{}", cells.size(), cell.label,
                                         std::llround(c.policy.overloaded_threshold * 100), r);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

ExperimentSpec load_experiment(const std::filesystem::path& path)
{
    json doc;
    try {
        doc = json::parse(read_file(path), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    if (!doc.is_object()) throw ConfigError("experiment root must be an object");
    const auto dir = path.parent_path();

    ExperimentSpec spec;
    if (!doc.contains("config")) throw ConfigError("experiment needs a 'config' entry");
    const auto& cfg = doc.at("config");
    if (cfg.is_string()) {
        std::filesystem::path p = cfg.get<std::string>();
        spec.base = load_config(p.is_relative() ? dir / p : p);
    } else {
        spec.base = config_from_json(cfg);
        if (!spec.base.trace.path.empty() && std::filesystem::path(spec.base.trace.path).is_relative())
            spec.base.trace.path = (dir / spec.base.trace.path).string();
    }

    if (doc.contains("sweep")) {
        if (!doc.at("sweep").is_object()) throw ConfigError("'sweep' must map axis names to value lists");
        for (const auto& [name, values] : doc.at("sweep").items()) {
            if (!values.is_array()) throw ConfigError(fmt::format("sweep.{} must be an array", name));
            SweepAxis axis{name, {}};
            for (const auto& v : values) axis.values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            spec.axes.push_back(std::move(axis));
        }
    }
    if (doc.contains("repetitions")) spec.repetitions = doc.at("repetitions").get<int>();
    std::filesystem::path out = doc.value("output_dir", std::string("results"));
    spec.output_dir = out.is_relative() ? dir / out : out;
    return spec;
}

SummaryRow summary_row(const std::string& label, int repetition, const json& j)
{
    SummaryRow row;
    row.label = label;
    row.repetition = repetition;
    row.policy = j.at("policy").get<std::string>();
    row.overloaded_threshold = j.at("overloaded_threshold").get<double>();
    row.optional_util_pct = j.at("optional_util_pct").get<double>();
    row.seed = j.at("seed").get<std::uint64_t>();
    row.energy_kwh = j.at("energy_kwh").get<double>();
    row.avg_response_ms = read_optional(j, "avg_response_ms");
    row.p_kth_response_ms = read_optional(j, "p_kth_response_ms");
    row.percentile_k = j.at("percentile_k").get<int>();
    row.slavr = read_optional(j, "slavr");
    row.otr_mean = j.at("otr_mean").get<double>();
    return row;
}

std::string summary_csv(const std::vector<SummaryRow>& rows)
{
    auto num = [](const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); };
    std::string out = "# energy in kWh, response times in ms, slavr and otr_mean as fractions; empty = not applicable\n";
    out += "label,policy,u_t,optional_util_pct,repetition,seed,energy_kwh,avg_response_ms,p_kth_response_ms,percentile_k,"
           "slavr,otr_mean\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{:.2f},{:.2f},{},{},{:.6f},{},{},{},{},{:.6f}\n", r.label, r.policy,
                           r.overloaded_threshold, r.optional_util_pct, r.repetition, r.seed, r.energy_kwh,
                           num(r.avg_response_ms), num(r.p_kth_response_ms), r.percentile_k, num(r.slavr), r.otr_mean);
    return out;
}

std::string summary_table(const std::vector<SummaryRow>& rows)
{
    const int k = rows.empty() ? 95 : rows.front().percentile_k;
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Policy", "u_t", "Rep", "Seed", "Energy (kWh)", "Avg (ms)", fmt::format("P{} (ms)", k),
                     "SLAVR (%)", "OTR (%)"});
    for (const auto& r : rows)
        cells.push_back({r.label, fmt::format("{:.2f}", r.overloaded_threshold), std::to_string(r.repetition),
                         std::to_string(r.seed), fmt::format("{:.3f}", r.energy_kwh),
                         format_or_dash(r.avg_response_ms, 1.0, 1), format_or_dash(r.p_kth_response_ms, 1.0, 1),
                         format_or_dash(r.slavr, 100.0, 3), fmt::format("{:.2f}", r.otr_mean * 100)});

    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t c = 0; c < cells[i].size(); ++c) {
            if (c > 0) out += "  ";
            // Label left-aligned, numbers right-aligned.
            out += c == 0 ? fmt::format("{:<{}}", cells[i][c], width[c]) : fmt::format("{:>{}}", cells[i][c], width[c]);
        }
        out += '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (auto w : width) total += w;
            out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
        }
    }
    return out;
}

std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec, unsigned jobs)
{
    if (auto v = validate_experiment(spec); !v.empty()) {
        std::string msg = "invalid experiment:";
        for (const auto& x : v) msg += fmt::format(" {}: {};", x.field, x.rule);
        throw ConfigError(msg);
    }
    const auto cells = expand_cells(spec);
    const auto trace = load_config_trace(spec.base);
    std::filesystem::create_directories(spec.output_dir);

    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(cells.size());
    auto worker = [&] {
        for (auto i = next++; i < cells.size(); i = next++) {
            try {
                run_to_directory(cells[i].config, trace, spec.output_dir / cells[i].directory);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    json manifest;
    manifest["cells"] = json::array();
    for (const auto& c : cells)
        manifest["cells"].push_back({{"label", c.label}, {"repetition", c.repetition}, {"directory", c.directory}});
    write_file_atomic(spec.output_dir / "manifest.json", manifest.dump(2) + "\n");
    return report_experiment(spec.output_dir);
}

std::vector<SummaryRow> report_experiment(const std::filesystem::path& output_dir)
{
    const auto manifest = json::parse(read_file(output_dir / "manifest.json"));
    std::vector<SummaryRow> rows;
    for (const auto& c : manifest.at("cells")) {
        const auto dir = output_dir / c.at("directory").get<std::string>();
        const auto result = json::parse(read_file(dir / "result.json"));
        rows.push_back(summary_row(c.at("label").get<std::string>(), c.at("repetition").get<int>(), result));
    }
    write_file_atomic(output_dir / "summary.csv", summary_csv(rows));
    write_file_atomic(output_dir / "summary.txt", summary_table(rows));
    return rows;
}

} // namespace brownsim
