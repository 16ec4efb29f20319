// Auto-scaling and the brownout controller with its container selectors.

#pragma once

#include "brownsim/model.hpp"
#include "brownsim/rng.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace brownsim {

// Target active-host count: clamp(ceil(predicted / capacity), min_active, fleet).
int autoscale(int active, double predicted_rate, double capacity, int fleet, int min_active);

// Auto-scaling with brownout folded into the scale-out branch. Scale-in
// follows autoscale(); scale-out waits until the load exceeds what the
// committed hosts can carry with every sheddable (optional) share switched
// off, and then jumps straight to the autoscale() target. With
// sheddable_share == 0 this is exactly autoscale().
int brownout_aware_target(int committed, double predicted_rate, double capacity, int fleet, int min_active,
                          double sheddable_share);

// theta = sqrt(overloaded / fleet).
double dimmer(int overloaded_hosts, int fleet);

// Utilization to shed on an overloaded host: the dimmer scales the host's
// power into a reduction, the remaining power is clamped into the profile's
// range and mapped back to utilization. Result lies in [0, utilization].
double expected_reduction(double utilization, double power, double theta, const PowerProfile& profile);

struct OptionalContainer {
    std::string id;
    double utilization = 0.0;
    std::optional<std::string> tag;
};

// Containers sharing a connection tag move together; an untagged container
// is a unit of its own.
struct SelectionUnit {
    std::vector<std::string> ids; // sorted
    double utilization = 0.0;
    std::optional<std::string> tag;
};

// Units sorted by utilization ascending, ties by first id.
std::vector<SelectionUnit> group_units(std::span<const OptionalContainer> ocl);

// Number of units up to which LUCF searches subsets exhaustively.
inline constexpr std::size_t lucf_exact_limit = 16;

// Lowest Utilization Container First: the smallest unit if it already covers
// `reduction`, otherwise the unit subset with the largest total not above
// `reduction` (ties: fewer units, then lexicographic ids).
std::vector<std::string> select_lucf(std::span<const OptionalContainer> ocl, double reduction);

// Minimum Number of Containers First: fewest units whose total reaches
// `reduction` (largest total among those); all units when none suffices.
std::vector<std::string> select_mncf(std::span<const OptionalContainer> ocl, double reduction);

// Random Selection Container: draws uniformly among the remaining units until
// the total reaches `reduction` or nothing is left.
std::vector<std::string> select_rsc(std::span<const OptionalContainer> ocl, double reduction, Rng& rng);

enum class Selector { lucf, mncf, rsc };

std::optional<Selector> selector_for(PolicyName policy);

std::vector<std::string> select(Selector selector, std::span<const OptionalContainer> ocl, double reduction, Rng& rng);

// What the controller sees of one active host.
struct HostSnapshot {
    std::string id;
    double utilization = 0.0;
    double power = 0.0;
    std::vector<OptionalContainer> optional;
};

struct BrownoutDecision {
    double dimmer = 0.0;
    int overloaded_hosts = 0;
    // Deactivation list per overloaded host (possibly empty).
    std::map<std::string, std::vector<std::string>> per_host;
    std::set<std::string> tags_used;
    // Set when no host is overloaded: every deactivated container comes back.
    bool reactivate_all = false;
    // Wall-clock time spent inside the selector, for profiling only.
    int selector_calls = 0;
    double selector_seconds = 0.0;
};

BrownoutDecision brownout_step(std::span<const HostSnapshot> hosts, int fleet_size, double overloaded_threshold,
                               const PowerProfile& profile, Selector selector, Rng& rng);

} // namespace brownsim
