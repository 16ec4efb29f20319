#include "brownsim/config.hpp"

#include <fmt/core.h>
#include <fstream>
#include <sstream>

namespace brownsim {

using nlohmann::json;

namespace {

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where)
{
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}.{}: {}", where, key, e.what()));
    }
}

const json& section(const json& doc, const char* key)
{
    static const json empty = json::object();
    if (!doc.contains(key)) return empty;
    const auto& s = doc.at(key);
    if (!s.is_object()) throw ConfigError(fmt::format("'{}' must be an object", key));
    return s;
}

PowerProfile profile_from_json(const json& j)
{
    PowerProfile p;
    p.breakpoints.clear();
    if (!j.contains("breakpoints") || !j.at("breakpoints").is_array())
        throw ConfigError("hosts.power_profile.breakpoints must be an array of [utilization, watts] pairs");
    for (const auto& bp : j.at("breakpoints")) {
        if (!bp.is_array() || bp.size() != 2 || !bp[0].is_number() || !bp[1].is_number())
            throw ConfigError("hosts.power_profile.breakpoints entries must be [utilization, watts]");
        p.breakpoints.push_back({bp[0].get<double>(), bp[1].get<double>()});
    }
    read(j, "sleep_power", p.sleep_power, "hosts.power_profile");
    std::string model = "table";
    read(j, "model", model, "hosts.power_profile");
    if (model == "table") p.model = PowerModel::table;
    else if (model == "linear") p.model = PowerModel::linear;
    else throw ConfigError("hosts.power_profile.model must be 'table' or 'linear'");
    return p;
}

} // namespace

SimConfig config_from_json(const json& doc)
{
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    SimConfig c;

    const auto& hosts = section(doc, "hosts");
    read(hosts, "count", c.hosts.count, "hosts");
    read(hosts, "count_by_policy", c.hosts.count_by_policy, "hosts");
    if (hosts.contains("initial_active") && !hosts.at("initial_active").is_null()) {
        int n = 0;
        read(hosts, "initial_active", n, "hosts");
        c.hosts.initial_active = n;
    }
    read(hosts, "boot_delay", c.policy.boot_delay, "hosts");
    if (hosts.contains("power_profile")) c.hosts.profile = profile_from_json(hosts.at("power_profile"));

    if (doc.contains("services")) {
        const auto& svc = doc.at("services");
        if (!svc.is_array()) throw ConfigError("'services' must be an array");
        for (std::size_t i = 0; i < svc.size(); ++i) {
            const auto& s = svc[i];
            const auto where = fmt::format("services[{}]", i);
            if (!s.is_object()) throw ConfigError(where + " must be an object");
            ContainerSpec spec;
            read(s, "id", spec.id, where);
            read(s, "service", spec.service, where);
            read(s, "weight", spec.weight, where);
            read(s, "optional", spec.optional, where);
            read(s, "replicas", spec.replicas, where);
            if (s.contains("connection_tag") && !s.at("connection_tag").is_null()) {
                std::string tag;
                read(s, "connection_tag", tag, where);
                spec.connection_tag = tag;
            }
            if (spec.service.empty()) spec.service = spec.id;
            c.services.push_back(std::move(spec));
        }
    }

    const auto& pol = section(doc, "policy");
    auto& p = c.policy;
    read(pol, "overloaded_threshold_u_t", p.overloaded_threshold, "policy");
    read(pol, "optional_util_pct", p.optional_util_pct, "policy");
    read(pol, "window_size_L_w", p.window_size, "policy");
    read(pol, "capacity_n_o", p.capacity, "policy");
    read(pol, "min_active_hosts", p.min_active_hosts, "policy");
    read(pol, "boot_delay", p.boot_delay, "policy");
    read(pol, "sla_alpha", p.sla_alpha, "policy");
    read(pol, "sla_beta", p.sla_beta_ms, "policy");
    read(pol, "sla_phi", p.sla_phi_ms, "policy");
    read(pol, "sla_gamma", p.sla_gamma, "policy");
    read(pol, "percentile_k", p.percentile_k, "policy");
    read(pol, "seed", p.seed, "policy");
    read(pol, "ewma_alpha", p.ewma_alpha, "policy");
    read(pol, "brownout_defers_scale_out", p.brownout_defers_scale_out, "policy");
    if (pol.contains("prediction")) {
        std::string m;
        read(pol, "prediction", m, "policy");
        if (m == "mean") p.prediction = PredictionMethod::mean;
        else if (m == "ewma") p.prediction = PredictionMethod::ewma;
        else throw ConfigError("policy.prediction must be 'mean' or 'ewma'");
    }
    if (pol.contains("sla_violation_ms") && !pol.at("sla_violation_ms").is_null()) {
        double v = 0;
        read(pol, "sla_violation_ms", v, "policy");
        p.sla_violation_ms = v;
    }

    const auto& resp = section(doc, "response");
    read(resp, "base_ms", c.response.base_ms, "response");
    read(resp, "jitter", c.response.jitter, "response");

    const auto& tr = section(doc, "trace");
    read(tr, "path", c.trace.path, "trace");
    read(tr, "scale", c.trace.scale, "trace");
    read(tr, "interval_seconds", c.trace.interval_seconds, "trace");

    if (doc.contains("policy_name")) {
        std::string name;
        read(doc, "policy_name", name, "config");
        auto parsed = parse_policy_name(name);
        if (!parsed) throw ConfigError(fmt::format("policy_name: unknown policy '{}' (expected NPA|AUTOS|LUCF|MNCF|RSC)", name));
        c.policy_name = *parsed;
    }
    return c;
}

json config_to_json(const SimConfig& c)
{
    json bps = json::array();
    for (const auto& bp : c.hosts.profile.breakpoints) bps.push_back({bp.utilization, bp.power});

    json hosts = {
        {"count", c.hosts.count},
        {"count_by_policy", c.hosts.count_by_policy},
        {"boot_delay", c.policy.boot_delay},
        {"power_profile",
         {{"breakpoints", bps},
          {"sleep_power", c.hosts.profile.sleep_power},
          {"model", c.hosts.profile.model == PowerModel::table ? "table" : "linear"}}},
    };
    if (c.hosts.initial_active) hosts["initial_active"] = *c.hosts.initial_active;

    json services = json::array();
    for (const auto& s : c.services) {
        json j = {{"id", s.id}, {"service", s.service}, {"weight", s.weight}, {"optional", s.optional}, {"replicas", s.replicas}};
        if (s.connection_tag) j["connection_tag"] = *s.connection_tag;
        services.push_back(std::move(j));
    }

    const auto& p = c.policy;
    json policy = {
        {"overloaded_threshold_u_t", p.overloaded_threshold},
        {"optional_util_pct", p.optional_util_pct},
        {"window_size_L_w", p.window_size},
        {"capacity_n_o", p.capacity},
        {"min_active_hosts", p.min_active_hosts},
        {"sla_alpha", p.sla_alpha},
        {"sla_beta", p.sla_beta_ms},
        {"sla_phi", p.sla_phi_ms},
        {"sla_gamma", p.sla_gamma},
        {"percentile_k", p.percentile_k},
        {"seed", p.seed},
        {"prediction", p.prediction == PredictionMethod::mean ? "mean" : "ewma"},
        {"ewma_alpha", p.ewma_alpha},
        {"brownout_defers_scale_out", p.brownout_defers_scale_out},
    };
    if (p.sla_violation_ms) policy["sla_violation_ms"] = *p.sla_violation_ms;

    return {
        {"hosts", hosts},
        {"services", services},
        {"policy", policy},
        {"response", {{"base_ms", c.response.base_ms}, {"jitter", c.response.jitter}}},
        {"trace", {{"path", c.trace.path}, {"scale", c.trace.scale}, {"interval_seconds", c.trace.interval_seconds}}},
        {"policy_name", std::string(to_string(c.policy_name))},
    };
}

SimConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    auto config = config_from_json(doc);
    if (!config.trace.path.empty()) {
        std::filesystem::path tp(config.trace.path);
        if (tp.is_relative()) config.trace.path = (path.parent_path() / tp).lexically_normal().string();
    }
    return config;
}

void apply_overrides(SimConfig& config, const Overrides& o)
{
    if (o.policy) {
        auto parsed = parse_policy_name(*o.policy);
        if (!parsed) throw ConfigError(fmt::format("unknown policy '{}' (expected NPA|AUTOS|LUCF|MNCF|RSC)", *o.policy));
        config.policy_name = *parsed;
    }
    if (o.seed) config.policy.seed = *o.seed;
    if (o.scale) config.trace.scale = *o.scale;
    if (o.trace_path) config.trace.path = *o.trace_path;
    if (o.overloaded_threshold) config.policy.overloaded_threshold = *o.overloaded_threshold;
    if (o.optional_pct) {
        config.policy.optional_util_pct = *o.optional_pct;
        if (*o.optional_pct >= 0.0 && *o.optional_pct <= 0.5) set_optional_share(config.services, *o.optional_pct);
    }
}

} // namespace brownsim
