#include "brownsim/policies.hpp"

#include "brownsim/power.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>

namespace brownsim {

namespace {

// Absorbs rounding in utilization sums such as 0.05 + 0.07 vs 0.12.
constexpr double sum_tolerance = 1e-12;

int required_hosts(double load, double capacity)
{
    if (load <= 0) return 0;
    return static_cast<int>(std::ceil(load / capacity - 1e-9));
}

std::vector<std::string> flatten(const std::vector<SelectionUnit>& units, const std::vector<std::size_t>& picked)
{
    std::vector<std::string> ids;
    for (auto i : picked) ids.insert(ids.end(), units[i].ids.begin(), units[i].ids.end());
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<std::size_t> mask_members(std::uint32_t mask)
{
    std::vector<std::size_t> out;
    while (mask) {
        out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
        mask &= mask - 1;
    }
    return out;
}

std::vector<std::string> lucf_exact(const std::vector<SelectionUnit>& units, double reduction)
{
    const auto n = units.size();
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;
    std::vector<double> sums(std::size_t{1} << n, 0.0);

    std::uint32_t best = 0;
    double best_total = -1.0;
    std::vector<std::string> best_ids;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        const auto low = static_cast<std::size_t>(std::countr_zero(mask));
        sums[mask] = sums[mask & (mask - 1)] + units[low].utilization;
        const double total = sums[mask];
        if (total > reduction + sum_tolerance) continue;

        bool better = total > best_total + sum_tolerance;
        if (!better && std::abs(total - best_total) <= sum_tolerance) {
            const int count = std::popcount(mask);
            const int best_count = std::popcount(best);
            if (count < best_count) {
                better = true;
            } else if (count == best_count) {
                auto ids = flatten(units, mask_members(mask));
                if (ids < best_ids) {
                    best = mask;
                    best_total = total;
                    best_ids = std::move(ids);
                }
                continue;
            }
        }
        if (better) {
            best = mask;
            best_total = total;
            best_ids = flatten(units, mask_members(mask));
        }
    }
    return best_ids;
}

std::vector<std::string> lucf_greedy(const std::vector<SelectionUnit>& units, double reduction)
{
    std::vector<std::size_t> order(units.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return units[a].utilization > units[b].utilization; });
    std::vector<std::size_t> picked;
    double total = 0.0;
    for (auto i : order) {
        if (total + units[i].utilization <= reduction + sum_tolerance) {
            total += units[i].utilization;
            picked.push_back(i);
        }
    }
    return flatten(units, picked);
}

} // namespace

int autoscale(int /*active*/, double predicted_rate, double capacity, int fleet, int min_active)
{
    return std::clamp(required_hosts(predicted_rate, capacity), min_active, fleet);
}

int brownout_aware_target(int committed, double predicted_rate, double capacity, int fleet, int min_active,
                          double sheddable_share)
{
    const int full = autoscale(committed, predicted_rate, capacity, fleet, min_active);
    const int shed = std::clamp(required_hosts(predicted_rate * (1.0 - sheddable_share), capacity), min_active, fleet);
    if (committed > full) return full;
    if (committed < shed) return full;
    return committed;
}

double dimmer(int overloaded_hosts, int fleet)
{
    if (fleet <= 0 || overloaded_hosts <= 0) return 0.0;
    return std::sqrt(std::min(1.0, static_cast<double>(overloaded_hosts) / fleet));
}

double expected_reduction(double utilization, double power, double theta, const PowerProfile& profile)
{
    const double target = std::clamp(power - theta * power, profile.idle_power(), profile.max_power());
    return std::clamp(utilization - hpm(profile, target), 0.0, utilization);
}

std::vector<SelectionUnit> group_units(std::span<const OptionalContainer> ocl)
{
    std::vector<SelectionUnit> units;
    std::map<std::string, std::size_t> by_tag;
    for (const auto& c : ocl) {
        if (c.tag) {
            auto [it, inserted] = by_tag.try_emplace(*c.tag, units.size());
            if (inserted) units.push_back({{}, 0.0, c.tag});
            auto& u = units[it->second];
            u.ids.push_back(c.id);
            u.utilization += c.utilization;
        } else {
            units.push_back({{c.id}, c.utilization, std::nullopt});
        }
    }
    for (auto& u : units) std::sort(u.ids.begin(), u.ids.end());
    std::sort(units.begin(), units.end(), [](const SelectionUnit& a, const SelectionUnit& b) {
        if (a.utilization != b.utilization) return a.utilization < b.utilization;
        return a.ids.front() < b.ids.front();
    });
    return units;
}

std::vector<std::string> select_lucf(std::span<const OptionalContainer> ocl, double reduction)
{
    if (ocl.empty() || reduction <= 0) return {};
    const auto units = group_units(ocl);
    if (units.front().utilization >= reduction) return units.front().ids;
    if (units.size() <= lucf_exact_limit) return lucf_exact(units, reduction);
    return lucf_greedy(units, reduction);
}

std::vector<std::string> select_mncf(std::span<const OptionalContainer> ocl, double reduction)
{
    if (ocl.empty() || reduction <= 0) return {};
    const auto units = group_units(ocl);
    std::vector<std::size_t> order(units.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // group_units breaks utilization ties by id, so a stable sort keeps that.
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return units[a].utilization > units[b].utilization; });

    std::vector<std::size_t> picked;
    double total = 0.0;
    for (auto i : order) {
        picked.push_back(i);
        total += units[i].utilization;
        if (total >= reduction - sum_tolerance) break;
    }
    return flatten(units, picked);
}

std::vector<std::string> select_rsc(std::span<const OptionalContainer> ocl, double reduction, Rng& rng)
{
    if (ocl.empty() || reduction <= 0) return {};
    const auto units = group_units(ocl);
    std::vector<std::size_t> remaining(units.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

    std::vector<std::size_t> picked;
    double total = 0.0;
    while (total < reduction - sum_tolerance && !remaining.empty()) {
        const auto k = rng.below(remaining.size());
        picked.push_back(remaining[k]);
        total += units[remaining[k]].utilization;
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return flatten(units, picked);
}

std::optional<Selector> selector_for(PolicyName policy)
{
    switch (policy) {
    case PolicyName::lucf: return Selector::lucf;
    case PolicyName::mncf: return Selector::mncf;
    case PolicyName::rsc: return Selector::rsc;
    default: return std::nullopt;
    }
}

std::vector<std::string> select(Selector selector, std::span<const OptionalContainer> ocl, double reduction, Rng& rng)
{
    switch (selector) {
    case Selector::lucf: return select_lucf(ocl, reduction);
    case Selector::mncf: return select_mncf(ocl, reduction);
    case Selector::rsc: return select_rsc(ocl, reduction, rng);
    }
    return {};
}

BrownoutDecision brownout_step(std::span<const HostSnapshot> hosts, int fleet_size, double overloaded_threshold,
                               const PowerProfile& profile, Selector selector, Rng& rng)
{
    BrownoutDecision decision;
    for (const auto& h : hosts)
        if (h.utilization > overloaded_threshold) ++decision.overloaded_hosts;

    if (decision.overloaded_hosts == 0) {
        decision.reactivate_all = true;
        return decision;
    }

    decision.dimmer = dimmer(decision.overloaded_hosts, fleet_size);
    for (const auto& h : hosts) {
        if (!(h.utilization > overloaded_threshold)) continue;
        const double reduction = expected_reduction(h.utilization, h.power, decision.dimmer, profile);
        const auto start = std::chrono::steady_clock::now();
        auto dcl = select(selector, h.optional, reduction, rng);
        decision.selector_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ++decision.selector_calls;
        for (const auto& id : dcl) {
            auto it = std::find_if(h.optional.begin(), h.optional.end(), [&](const auto& c) { return c.id == id; });
            if (it != h.optional.end() && it->tag) decision.tags_used.insert(*it->tag);
        }
        decision.per_host[h.id] = std::move(dcl);
    }
    return decision;
}

} // namespace brownsim
