// Host power model (utilization -> watts and back) and energy accounting.

#pragma once

#include "brownsim/model.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace brownsim {

class PowerRangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Host power for a mode and utilization. Off draws nothing, sleep draws the
// profile's sleep power, booting and active hosts follow the curve.
double hum(const PowerProfile& profile, HostMode mode, double utilization);

// Inverse of hum for an active host. `power` must lie within
// [idle_power, max_power]; flat segments resolve to their lowest utilization.
double hpm(const PowerProfile& profile, double power);

// Power-domain overload threshold TP = hum(active, u_t).
double overload_power_threshold(const PowerProfile& profile, double utilization_threshold);

class EnergyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EnergyAccumulator {
    std::map<std::string, double> per_host_wh;
    double total_wh = 0.0;

    double total_kwh() const { return total_wh / 1000.0; }
};

// Rectangle rule: each host's power is held constant over the interval.
EnergyAccumulator accumulate_energy(EnergyAccumulator acc, const std::map<std::string, double>& host_powers,
                                    double interval_seconds);

} // namespace brownsim
