#include "brownsim/qos.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <numeric>

namespace brownsim {

double otr(const std::vector<bool>& overloaded)
{
    if (overloaded.empty()) throw MetricError("OTR needs at least one interval");
    const auto hits = std::count(overloaded.begin(), overloaded.end(), true);
    return static_cast<double>(hits) / static_cast<double>(overloaded.size());
}

double otr_mean(const std::map<std::string, double>& per_host)
{
    if (per_host.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [id, v] : per_host) sum += v;
    return sum / static_cast<double>(per_host.size());
}

std::optional<double> slavr(std::int64_t errors, std::int64_t total)
{
    if (errors < 0 || errors > total) throw MetricError(fmt::format("{} errors out of {} requests", errors, total));
    if (total == 0) return std::nullopt;
    return static_cast<double>(errors) / static_cast<double>(total);
}

double percentile(std::span<const double> samples, int k)
{
    if (samples.empty()) throw MetricError("percentile of an empty sample set");
    if (k < 1 || k > 100) throw MetricError(fmt::format("percentile rank {} outside [1, 100]", k));
    // Integer arithmetic keeps ceil(k * N / 100) exact.
    const auto n = samples.size();
    const auto rank = std::max<std::size_t>(1, (static_cast<std::size_t>(k) * n + 99) / 100);
    std::vector<double> copy(samples.begin(), samples.end());
    auto nth = copy.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(copy.begin(), nth, copy.end());
    return *nth;
}

double mean(std::span<const double> samples)
{
    if (samples.empty()) throw MetricError("mean of an empty sample set");
    return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

bool QosReport::all_pass() const
{
    return std::all_of(constraints.begin(), constraints.end(), [](const auto& c) { return c.pass; });
}

QosReport check_constraints(const RunResult& result, const PolicyConfig& config)
{
    QosReport q;
    q.otr_per_host = result.otr_per_host;
    q.otr_mean = result.otr_mean;
    q.avg_response_ms = result.avg_response_ms;
    q.p_kth_response_ms = result.p_kth_response_ms;
    q.slavr = result.slavr;
    q.energy_kwh = result.energy_kwh;

    auto check = [&](std::string name, double bound, std::optional<double> actual) {
        q.constraints.push_back({std::move(name), bound, actual, !actual || *actual <= bound});
    };
    check("otr_mean", config.sla_alpha, result.otr_mean);
    check("avg_response_ms", config.sla_beta_ms, result.avg_response_ms);
    check(fmt::format("p{}_response_ms", result.percentile_k), config.sla_phi_ms, result.p_kth_response_ms);
    check("slavr", config.sla_gamma, result.slavr);

    if (config.sla_violation_ms) {
        std::int64_t served = 0;
        std::int64_t slow = 0;
        for (const auto& rec : result.interval_records) {
            served += static_cast<std::int64_t>(rec.response_samples_ms.size());
            for (double ms : rec.response_samples_ms)
                if (ms > *config.sla_violation_ms) ++slow;
        }
        if (served > 0) q.slow_request_ratio = static_cast<double>(slow) / static_cast<double>(served);
    }
    return q;
}

} // namespace brownsim
