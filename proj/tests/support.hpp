// Shared helpers for the test binaries: brute-force oracles, random instance
// generators and scenario builders.

#pragma once

#include "brownsim/config.hpp"
#include "brownsim/model.hpp"
#include "brownsim/policies.hpp"
#include "brownsim/rng.hpp"
#include "brownsim/workload.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fmt/core.h>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

inline const std::filesystem::path data_dir{BROWNSIM_DATA_DIR};

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fresh, empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::path(BROWNSIM_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline brownsim::SimConfig sample_config() { return brownsim::load_config(data_dir / "sample.json"); }

// Config whose stack is {0.6 mandatory, 0.2 optional, 0.2 optional}.
inline brownsim::SimConfig small_config(brownsim::PolicyName policy, int hosts)
{
    brownsim::SimConfig c;
    c.policy_name = policy;
    c.hosts.count = hosts;
    c.services = {{"app", "app", 0.6, false, std::nullopt, 1},
                  {"rec", "rec", 0.2, true, std::nullopt, 1},
                  {"ads", "ads", 0.2, true, std::nullopt, 1}};
    c.policy.optional_util_pct = 0.4;
    c.policy.capacity = 10;
    return c;
}

inline brownsim::Trace make_trace(std::vector<std::int64_t> rates, double interval_seconds = 60.0)
{
    brownsim::Trace t;
    t.interval_seconds = interval_seconds;
    t.rates = std::move(rates);
    return t;
}

// ---- exhaustive selector oracles -------------------------------------------

// Every subset of the optional list that is closed under connection tags,
// enumerated over containers (not pre-grouped units).
struct Subset {
    std::vector<std::string> ids; // sorted
    double total = 0.0;
    int units = 0;
};

inline std::vector<Subset> tag_closed_subsets(const std::vector<brownsim::OptionalContainer>& ocl)
{
    const auto n = ocl.size();
    std::vector<Subset> out;
    for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
        bool closed = true;
        for (std::size_t i = 0; i < n && closed; ++i) {
            if (!(mask >> i & 1) || !ocl[i].tag) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (ocl[j].tag == ocl[i].tag && !(mask >> j & 1)) closed = false;
        }
        if (!closed) continue;
        Subset s;
        std::set<std::string> tags;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mask >> i & 1)) continue;
            s.ids.push_back(ocl[i].id);
            s.total += ocl[i].utilization;
            if (ocl[i].tag) tags.insert(*ocl[i].tag);
            else ++s.units;
        }
        s.units += static_cast<int>(tags.size());
        std::sort(s.ids.begin(), s.ids.end());
        out.push_back(std::move(s));
    }
    return out;
}

constexpr double oracle_eps = 1e-12;

struct LucfOracle {
    double total = 0.0;
    int units = 0;
    std::vector<std::string> ids;
};

// Smallest unit when it covers the reduction on its own, otherwise the subset
// with the largest total not above the reduction (fewest units, then ids).
inline LucfOracle lucf_oracle(const std::vector<brownsim::OptionalContainer>& ocl, double reduction)
{
    LucfOracle best;
    if (ocl.empty() || reduction <= 0) return best;
    const auto subsets = tag_closed_subsets(ocl);

    const Subset* smallest = nullptr;
    for (const auto& s : subsets) {
        if (s.units != 1) continue;
        if (!smallest || s.total < smallest->total - oracle_eps ||
            (std::abs(s.total - smallest->total) <= oracle_eps && s.ids.front() < smallest->ids.front()))
            smallest = &s;
    }
    if (smallest->total >= reduction) return {smallest->total, 1, smallest->ids};

    const Subset* pick = nullptr;
    for (const auto& s : subsets) {
        if (s.total > reduction + oracle_eps) continue;
        if (!pick || s.total > pick->total + oracle_eps) {
            pick = &s;
        } else if (std::abs(s.total - pick->total) <= oracle_eps) {
            if (s.units < pick->units || (s.units == pick->units && s.ids < pick->ids)) pick = &s;
        }
    }
    return {pick->total, pick->units, pick->ids};
}

struct MncfOracle {
    int units = 0;
    double total = 0.0;
};

// Fewest units reaching the reduction (largest total among those); all units
// when nothing reaches it.
inline MncfOracle mncf_oracle(const std::vector<brownsim::OptionalContainer>& ocl, double reduction)
{
    if (ocl.empty() || reduction <= 0) return {};
    const auto subsets = tag_closed_subsets(ocl);
    const Subset* pick = nullptr;
    const Subset* all = nullptr;
    for (const auto& s : subsets) {
        if (s.ids.size() == ocl.size()) all = &s;
        if (s.total < reduction - oracle_eps) continue;
        if (!pick || s.units < pick->units || (s.units == pick->units && s.total > pick->total + oracle_eps))
            pick = &s;
    }
    if (!pick) pick = all;
    return {pick->units, pick->total};
}

// Number of selection units (tag groups plus untagged containers) in `ids`.
inline int count_units(const std::vector<brownsim::OptionalContainer>& ocl, const std::vector<std::string>& ids)
{
    std::set<std::string> tags;
    int untagged = 0;
    for (const auto& id : ids) {
        auto it = std::find_if(ocl.begin(), ocl.end(), [&](const auto& c) { return c.id == id; });
        if (it == ocl.end()) return -1;
        if (it->tag) tags.insert(*it->tag);
        else ++untagged;
    }
    return untagged + static_cast<int>(tags.size());
}

inline double total_of(const std::vector<brownsim::OptionalContainer>& ocl, const std::vector<std::string>& ids)
{
    double sum = 0.0;
    for (const auto& c : ocl)
        if (std::find(ids.begin(), ids.end(), c.id) != ids.end()) sum += c.utilization;
    return sum;
}

inline bool tag_closed(const std::vector<brownsim::OptionalContainer>& ocl, const std::vector<std::string>& ids)
{
    std::set<std::string> chosen(ids.begin(), ids.end());
    std::set<std::string> tags;
    for (const auto& c : ocl)
        if (chosen.count(c.id) && c.tag) tags.insert(*c.tag);
    for (const auto& c : ocl)
        if (c.tag && tags.count(*c.tag) && !chosen.count(c.id)) return false;
    return true;
}

// Random optional list with up to `max_containers` containers. Utilizations
// come from a coarse grid half of the time so exact ties show up.
inline std::vector<brownsim::OptionalContainer> random_ocl(brownsim::Rng& rng, std::size_t max_containers)
{
    const auto n = 1 + rng.below(max_containers);
    const auto tag_count = rng.below(4);
    const bool grid = rng.below(2) == 0;
    std::vector<brownsim::OptionalContainer> ocl;
    for (std::size_t i = 0; i < n; ++i) {
        brownsim::OptionalContainer c;
        c.id = "c" + std::to_string(100 + i);
        c.utilization = grid ? 0.01 * static_cast<double>(1 + rng.below(10)) : rng.uniform(0.001, 0.2);
        if (tag_count > 0 && rng.below(3) == 0) c.tag = "t" + std::to_string(rng.below(tag_count));
        ocl.push_back(std::move(c));
    }
    // Shuffle so input order never matters.
    for (std::size_t i = ocl.size(); i > 1; --i) std::swap(ocl[i - 1], ocl[rng.below(i)]);
    return ocl;
}

} // namespace testing
