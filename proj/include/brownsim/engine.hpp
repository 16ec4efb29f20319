// Discrete-time simulation loop.

#pragma once

#include "brownsim/model.hpp"
#include "brownsim/policies.hpp"
#include "brownsim/power.hpp"
#include "brownsim/rng.hpp"
#include "brownsim/workload.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace brownsim {

// Even split over `hosts` hosts, the remainder going to the first ones.
std::vector<std::int64_t> route_demand(std::int64_t requests, std::size_t hosts);

struct HostLoad {
    // Requests assigned divided by per-host capacity.
    double demand = 0.0;
    // demand times the weights of the active instances, before clamping.
    double raw = 0.0;
};

// Sets instance and host utilization for `assigned` requests. Inactive
// instances contribute nothing; host utilization is clamped to [0, 1].
HostLoad derive_utilization(HostState& host, std::int64_t assigned, double capacity,
                            std::span<const ContainerSpec> specs);

struct ResponseBatch {
    std::vector<double> samples_ms;
    std::int64_t errors = 0;
};

// base / (1 - min(u, 0.99)) per request with +-jitter noise. When the raw
// demand exceeds 1 the excess fraction of requests fails instead.
ResponseBatch synthesize_response(std::int64_t requests, double utilization, double raw_demand,
                                  const ResponseModel& model, Rng& rng);

// Host ids sort in index order.
std::string host_id(int index);

class Simulator {
public:
    // Throws std::invalid_argument if the config does not validate.
    Simulator(SimConfig config, Trace trace);

    bool done() const { return t_ >= static_cast<int>(trace_.rates.size()); }
    int t() const { return t_; }
    const std::vector<HostState>& hosts() const { return hosts_; }
    const SimConfig& config() const { return config_; }

    // Runs interval t() and advances to the next one.
    IntervalRecord step();

    // Runs the remaining intervals and aggregates the metrics.
    RunResult run();

private:
    void scale(int target);
    void advance_booting();
    void activate(HostState& host);
    void brownout(std::vector<HostLoad>& loads, std::span<const std::size_t> active,
                  std::span<const std::int64_t> assigned);
    int target_for(double predicted) const;

    SimConfig config_;
    Trace trace_;
    int fleet_ = 0;
    std::vector<HostState> hosts_;
    std::vector<bool> added_now_;
    std::vector<int> active_intervals_;
    std::vector<int> overloaded_intervals_;
    Rng response_rng_;
    Rng selector_rng_;
    std::optional<Selector> selector_;
    EnergyAccumulator energy_;
    RunTiming timing_;
    std::vector<IntervalRecord> records_;
    int t_ = 0;
};

RunResult run_simulation(const SimConfig& config, const Trace& trace);

} // namespace brownsim
