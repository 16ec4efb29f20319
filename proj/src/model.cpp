#include "brownsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <set>

namespace brownsim {

namespace {

constexpr double weight_tolerance = 1e-9;

} // namespace

std::string_view to_string(HostMode mode)
{
    switch (mode) {
    case HostMode::off: return "off";
    case HostMode::sleep: return "sleep";
    case HostMode::booting: return "booting";
    case HostMode::active: return "active";
    }
    return "unknown";
}

std::string_view to_string(PolicyName policy)
{
    switch (policy) {
    case PolicyName::npa: return "NPA";
    case PolicyName::autos: return "AUTOS";
    case PolicyName::lucf: return "LUCF";
    case PolicyName::mncf: return "MNCF";
    case PolicyName::rsc: return "RSC";
    }
    return "unknown";
}

std::optional<PolicyName> parse_policy_name(std::string_view text)
{
    for (auto p : {PolicyName::npa, PolicyName::autos, PolicyName::lucf, PolicyName::mncf, PolicyName::rsc}) {
        if (to_string(p) == text) return p;
    }
    return std::nullopt;
}

bool uses_autoscaling(PolicyName policy) { return policy != PolicyName::npa; }

bool uses_brownout(PolicyName policy)
{
    return policy == PolicyName::lucf || policy == PolicyName::mncf || policy == PolicyName::rsc;
}

PowerProfile PowerProfile::sun_fire_v20z()
{
    PowerProfile p;
    p.breakpoints = {{0.0, 201}, {0.1, 206}, {0.2, 211}, {0.3, 213}, {0.4, 216}, {0.5, 221},
                     {0.6, 223}, {0.7, 225}, {0.8, 231}, {0.9, 233}, {1.0, 237}};
    p.sleep_power = 10;
    return p;
}

int SimConfig::fleet_size() const
{
    if (auto it = hosts.count_by_policy.find(std::string(to_string(policy_name))); it != hosts.count_by_policy.end())
        return it->second;
    return hosts.count;
}

double optional_share(const std::vector<ContainerSpec>& services)
{
    double sum = 0.0;
    for (const auto& s : services)
        if (s.optional) sum += s.weight * s.replicas;
    return sum;
}

void set_optional_share(std::vector<ContainerSpec>& services, double pct)
{
    double optional_sum = 0.0;
    double mandatory_sum = 0.0;
    for (const auto& s : services)
        (s.optional ? optional_sum : mandatory_sum) += s.weight * s.replicas;

    for (auto& s : services) {
        if (s.optional && optional_sum > 0) s.weight *= pct / optional_sum;
        if (!s.optional && mandatory_sum > 0) s.weight *= (1.0 - pct) / mandatory_sum;
    }
}

std::vector<Violation> validate_config(const SimConfig& config)
{
    std::vector<Violation> out;
    auto add = [&out](std::string field, std::string rule) { out.push_back({std::move(field), std::move(rule)}); };

    const auto& prof = config.hosts.profile;
    const auto& bps = prof.breakpoints;
    if (bps.size() < 2) {
        add("hosts.power_profile.breakpoints", "needs at least two breakpoints");
    } else {
        if (bps.front().utilization != 0.0 || bps.back().utilization != 1.0)
            add("hosts.power_profile.breakpoints", "must cover utilization 0.0 and 1.0");
        for (std::size_t i = 1; i < bps.size(); ++i) {
            if (!(bps[i].utilization > bps[i - 1].utilization)) {
                add("hosts.power_profile.breakpoints", "utilization must be strictly increasing");
                break;
            }
        }
        for (std::size_t i = 1; i < bps.size(); ++i) {
            if (bps[i].power < bps[i - 1].power) {
                add("hosts.power_profile.breakpoints", "power must be non-decreasing in utilization");
                break;
            }
        }
        if (!(prof.sleep_power < bps.front().power))
            add("hosts.power_profile.sleep_power", "must be below the power at utilization 0.0");
    }
    if (prof.sleep_power < 0) add("hosts.power_profile.sleep_power", "must be non-negative");

    if (config.hosts.count < 1) add("hosts.count", "must be >= 1");
    for (const auto& [name, count] : config.hosts.count_by_policy) {
        if (!parse_policy_name(name)) add("hosts.count_by_policy." + name, "unknown policy name");
        if (count < 1) add("hosts.count_by_policy." + name, "must be >= 1");
    }
    const int fleet = config.fleet_size();
    if (config.hosts.initial_active && (*config.hosts.initial_active < 1 || *config.hosts.initial_active > fleet))
        add("hosts.initial_active", "must be within [1, fleet size]");

    const auto& pol = config.policy;
    if (pol.overloaded_threshold < 0.5 || pol.overloaded_threshold > 1.0)
        add("policy.overloaded_threshold_u_t", "must be within [0.5, 1.0]");
    if (pol.optional_util_pct < 0.0 || pol.optional_util_pct > 0.5)
        add("policy.optional_util_pct", "must be within [0, 0.5]");
    if (pol.window_size < 1) add("policy.window_size_L_w", "must be >= 1");
    if (!(pol.capacity > 0)) add("policy.capacity_n_o", "must be > 0");
    if (pol.min_active_hosts < 1) add("policy.min_active_hosts", "must be >= 1");
    else if (pol.min_active_hosts > fleet) add("policy.min_active_hosts", "must not exceed the fleet size");
    if (pol.boot_delay < 0) add("policy.boot_delay", "must be >= 0");
    if (pol.sla_alpha < 0 || pol.sla_alpha > 1) add("policy.sla_alpha", "must be within [0, 1]");
    if (pol.sla_beta_ms < 0) add("policy.sla_beta", "must be non-negative");
    if (pol.sla_phi_ms < 0) add("policy.sla_phi", "must be non-negative");
    if (pol.sla_gamma < 0 || pol.sla_gamma > 1) add("policy.sla_gamma", "must be within [0, 1]");
    if (pol.percentile_k < 1 || pol.percentile_k > 100) add("policy.percentile_k", "must be within [1, 100]");
    if (pol.ewma_alpha <= 0 || pol.ewma_alpha > 1) add("policy.ewma_alpha", "must be within (0, 1]");
    if (pol.sla_violation_ms && *pol.sla_violation_ms < 0) add("policy.sla_violation_ms", "must be non-negative");

    if (config.response.base_ms <= 0) add("response.base_ms", "must be > 0");
    if (config.response.jitter < 0 || config.response.jitter >= 1) add("response.jitter", "must be within [0, 1)");

    if (config.trace.scale <= 0) add("trace.scale", "must be > 0");
    if (config.trace.interval_seconds <= 0) add("trace.interval_seconds", "must be > 0");

    if (config.services.empty()) {
        add("services", "at least one container is required");
    } else {
        std::set<std::string> ids;
        double total = 0.0;
        for (std::size_t i = 0; i < config.services.size(); ++i) {
            const auto& s = config.services[i];
            const auto field = fmt::format("services[{}]", i);
            if (s.id.empty()) add(field + ".id", "must not be empty");
            if (!ids.insert(s.id).second) add(field + ".id", "duplicate container id '" + s.id + "'");
            if (!(s.weight > 0.0 && s.weight <= 1.0)) add(field + ".weight", "must be within (0, 1]");
            if (s.replicas < 1) add(field + ".replicas", "must be >= 1");
            if (s.connection_tag && s.connection_tag->empty()) add(field + ".connection_tag", "must not be empty when present");
            total += s.weight * s.replicas;
        }
        if (std::abs(total - 1.0) > weight_tolerance)
            add("services", fmt::format("weights (times replicas) must sum to 1, got {:.12g}", total));
        const double opt = optional_share(config.services);
        if (std::abs(opt - pol.optional_util_pct) > weight_tolerance)
            add("services", fmt::format("optional weights sum to {:.12g} but policy.optional_util_pct is {:.12g}", opt,
                                        pol.optional_util_pct));
    }
    return out;
}

double IntervalRecord::total_power_watts() const
{
    double sum = 0.0;
    for (const auto& h : per_host) sum += h.power_watts;
    return sum;
}

int IntervalRecord::overloaded_hosts() const
{
    return static_cast<int>(std::count_if(per_host.begin(), per_host.end(), [](const auto& h) { return h.overloaded; }));
}

} // namespace brownsim
