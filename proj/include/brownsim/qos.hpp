// QoS metrics and the SLA constraint checks.

#pragma once

#include "brownsim/model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace brownsim {

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Fraction of intervals flagged overloaded. Throws on an empty series.
double otr(const std::vector<bool>& overloaded);

// Unweighted mean over hosts; 0 for an empty map.
double otr_mean(const std::map<std::string, double>& per_host);

// errors / total, or nullopt when there were no requests.
std::optional<double> slavr(std::int64_t errors, std::int64_t total);

// Nearest rank: the ceil(k/100 * N)-th smallest sample. Throws on empty input
// or k outside [1, 100].
double percentile(std::span<const double> samples, int k);

double mean(std::span<const double> samples);

struct ConstraintCheck {
    std::string name;
    double bound = 0.0;
    // Missing when the metric is undefined for the run (no requests served).
    std::optional<double> actual;
    bool pass = true;
};

struct QosReport {
    std::map<std::string, double> otr_per_host;
    double otr_mean = 0.0;
    std::optional<double> avg_response_ms;
    std::optional<double> p_kth_response_ms;
    std::optional<double> slavr;
    // Reported next to the checks; it is the quantity being minimized.
    double energy_kwh = 0.0;
    // Share of served requests slower than policy.sla_violation_ms, when set.
    std::optional<double> slow_request_ratio;
    std::vector<ConstraintCheck> constraints;

    bool all_pass() const;
};

QosReport check_constraints(const RunResult& result, const PolicyConfig& config);

} // namespace brownsim
