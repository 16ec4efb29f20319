// Domain types shared by the simulator: hosts, containers, policy settings
// and the records a run produces.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace brownsim {

enum class HostMode { off, sleep, booting, active };

std::string_view to_string(HostMode mode);

enum class PolicyName { npa, autos, lucf, mncf, rsc };

std::string_view to_string(PolicyName policy);
std::optional<PolicyName> parse_policy_name(std::string_view text);

// NPA keeps every host on; everything else runs the auto-scaler.
bool uses_autoscaling(PolicyName policy);
// LUCF, MNCF and RSC add the brownout controller on top of auto-scaling.
bool uses_brownout(PolicyName policy);

enum class PowerModel { table, linear };

struct Breakpoint {
    double utilization = 0.0;
    double power = 0.0;

    bool operator==(const Breakpoint&) const = default;
};

// Measured utilization -> watts curve of one machine type.
//
// The table model interpolates linearly between breakpoints. The linear model
// only uses the end points: P = P_idle + u * (P_max - P_idle).
struct PowerProfile {
    std::vector<Breakpoint> breakpoints;
    double sleep_power = 0.0;
    PowerModel model = PowerModel::table;

    static constexpr double off_power = 0.0;

    // Sun Fire V20z measurements (0%..100% in 10% steps, 10 W asleep).
    static PowerProfile sun_fire_v20z();

    double idle_power() const { return breakpoints.front().power; }
    double max_power() const { return breakpoints.back().power; }
    double dynamic_power() const { return max_power() - idle_power(); }

    bool operator==(const PowerProfile&) const = default;
};

struct ContainerSpec {
    std::string id;
    std::string service;
    // Per-replica share of one request's CPU work on a host.
    double weight = 0.0;
    bool optional = false;
    std::optional<std::string> connection_tag;
    int replicas = 1;

    bool operator==(const ContainerSpec&) const = default;
};

struct ContainerInstance {
    std::string id;
    std::string spec_id;
    std::string host_id;
    std::size_t spec_index = 0;
    bool active = true;
    double utilization = 0.0;
};

struct HostState {
    std::string id;
    HostMode mode = HostMode::off;
    int boot_remaining = 0;
    std::vector<ContainerInstance> instances;
    double utilization = 0.0;
    double power = 0.0;
};

struct FleetConfig {
    int count = 10;
    // Per-policy fleet size, e.g. a larger allocation for the NPA baseline.
    std::map<std::string, int> count_by_policy;
    std::optional<int> initial_active;
    PowerProfile profile = PowerProfile::sun_fire_v20z();

    bool operator==(const FleetConfig&) const = default;
};

enum class PredictionMethod { mean, ewma };

struct PolicyConfig {
    double overloaded_threshold = 0.8;
    double optional_util_pct = 0.3;
    int window_size = 5;
    double capacity = 25.0;
    int min_active_hosts = 1;
    int boot_delay = 1;
    double sla_alpha = 0.1;
    double sla_beta_ms = 1000.0;
    double sla_phi_ms = 2000.0;
    double sla_gamma = 0.02;
    int percentile_k = 95;
    std::uint64_t seed = 42;
    PredictionMethod prediction = PredictionMethod::mean;
    double ewma_alpha = 0.5;
    // Brownout policies hold off adding hosts while optional containers can
    // still absorb the predicted load.
    bool brownout_defers_scale_out = true;
    // Response-time bound for the optional slow-request ratio; off when unset.
    std::optional<double> sla_violation_ms;

    bool operator==(const PolicyConfig&) const = default;
};

struct ResponseModel {
    double base_ms = 60.0;
    double jitter = 0.05;

    bool operator==(const ResponseModel&) const = default;
};

struct TraceSource {
    std::string path;
    double scale = 1.0;
    double interval_seconds = 60.0;

    bool operator==(const TraceSource&) const = default;
};

struct SimConfig {
    FleetConfig hosts;
    std::vector<ContainerSpec> services;
    PolicyConfig policy;
    ResponseModel response;
    TraceSource trace;
    PolicyName policy_name = PolicyName::lucf;

    // Fleet size for the configured policy (count_by_policy wins over count).
    int fleet_size() const;

    bool operator==(const SimConfig&) const = default;
};

struct Violation {
    std::string field;
    std::string rule;
};

std::vector<Violation> validate_config(const SimConfig& config);

// Sum of weight * replicas over optional specs.
double optional_share(const std::vector<ContainerSpec>& services);

// Rescales optional weights so they sum to `pct` and mandatory weights so
// they sum to 1 - pct, keeping relative proportions inside each class.
void set_optional_share(std::vector<ContainerSpec>& services, double pct);

struct HostIntervalSample {
    double utilization = 0.0;
    double power_watts = 0.0;
    bool overloaded = false;
};

struct IntervalRecord {
    int t = 0;
    std::int64_t requests = 0;
    int active_hosts = 0;
    std::vector<HostIntervalSample> per_host;
    std::vector<double> response_samples_ms;
    std::int64_t errors = 0;
    int deactivated_containers = 0;

    double total_power_watts() const;
    int overloaded_hosts() const;
};

struct RunTiming {
    std::int64_t brownout_invocations = 0;
    double brownout_seconds = 0.0;
    // Selector calls, one per overloaded host per invocation.
    std::int64_t selector_calls = 0;
    double selector_seconds = 0.0;

    double mean_invocation_seconds() const
    {
        return brownout_invocations == 0 ? 0.0 : brownout_seconds / static_cast<double>(brownout_invocations);
    }
    double mean_selector_seconds() const
    {
        return selector_calls == 0 ? 0.0 : selector_seconds / static_cast<double>(selector_calls);
    }
};

struct RunResult {
    PolicyName policy = PolicyName::lucf;
    std::uint64_t seed = 0;
    int fleet_size = 0;
    double interval_seconds = 60.0;
    double energy_kwh = 0.0;
    std::map<std::string, double> energy_per_host_wh;
    std::map<std::string, double> otr_per_host;
    double otr_mean = 0.0;
    std::optional<double> avg_response_ms;
    std::optional<double> p_kth_response_ms;
    int percentile_k = 95;
    std::optional<double> slavr;
    std::int64_t total_requests = 0;
    std::int64_t total_errors = 0;
    std::vector<int> active_host_series;
    std::vector<IntervalRecord> interval_records;
    // Wall-clock measurements; never serialized, so outputs stay reproducible.
    RunTiming timing;
};

} // namespace brownsim
