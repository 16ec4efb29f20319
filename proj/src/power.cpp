#include "brownsim/power.hpp"

#include <algorithm>
#include <fmt/core.h>

namespace brownsim {

namespace {

double interpolate(const PowerProfile& profile, double u)
{
    u = std::clamp(u, 0.0, 1.0);
    if (profile.model == PowerModel::linear) return profile.idle_power() + u * profile.dynamic_power();

    const auto& bps = profile.breakpoints;
    // First breakpoint with utilization >= u.
    auto hi = std::lower_bound(bps.begin(), bps.end(), u,
                               [](const Breakpoint& bp, double value) { return bp.utilization < value; });
    if (hi == bps.begin()) return hi->power;
    if (hi == bps.end()) return bps.back().power;
    if (hi->utilization == u) return hi->power;
    auto lo = std::prev(hi);
    const double frac = (u - lo->utilization) / (hi->utilization - lo->utilization);
    return lo->power + frac * (hi->power - lo->power);
}

} // namespace

double hum(const PowerProfile& profile, HostMode mode, double utilization)
{
    switch (mode) {
    case HostMode::off: return PowerProfile::off_power;
    case HostMode::sleep: return profile.sleep_power;
    case HostMode::booting:
    case HostMode::active: return interpolate(profile, utilization);
    }
    return 0.0;
}

double hpm(const PowerProfile& profile, double power)
{
    const double lo_p = profile.idle_power();
    const double hi_p = profile.max_power();
    if (power < lo_p || power > hi_p)
        throw PowerRangeError(fmt::format("power {} W outside the valid interval [{}, {}] W", power, lo_p, hi_p));

    if (profile.model == PowerModel::linear) {
        const double dyn = profile.dynamic_power();
        return dyn > 0 ? (power - lo_p) / dyn : 0.0;
    }

    const auto& bps = profile.breakpoints;
    // First breakpoint whose power reaches the target.
    auto hi = std::lower_bound(bps.begin(), bps.end(), power,
                               [](const Breakpoint& bp, double value) { return bp.power < value; });
    if (hi == bps.begin() || hi->power == power) return hi->utilization;
    auto lo = std::prev(hi);
    const double frac = (power - lo->power) / (hi->power - lo->power);
    return lo->utilization + frac * (hi->utilization - lo->utilization);
}

double overload_power_threshold(const PowerProfile& profile, double utilization_threshold)
{
    return hum(profile, HostMode::active, utilization_threshold);
}

EnergyAccumulator accumulate_energy(EnergyAccumulator acc, const std::map<std::string, double>& host_powers,
                                    double interval_seconds)
{
    if (!(interval_seconds > 0)) throw EnergyError("interval length must be positive");
    for (const auto& [host, watts] : host_powers) {
        if (watts < 0) throw EnergyError(fmt::format("negative power {} W for host {}", watts, host));
        const double wh = watts * interval_seconds / 3600.0;
        acc.per_host_wh[host] += wh;
        acc.total_wh += wh;
    }
    return acc;
}

} // namespace brownsim
