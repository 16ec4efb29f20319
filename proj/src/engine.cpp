#include "brownsim/engine.hpp"

#include "brownsim/qos.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/core.h>
#include <numeric>
#include <set>
#include <stdexcept>

namespace brownsim {

namespace {

// Keeps the jitter and selector streams apart so adding a selector draw never
// shifts response samples.
constexpr std::uint64_t selector_stream = 0x9E3779B97F4A7C15ULL;

} // namespace

std::vector<std::int64_t> route_demand(std::int64_t requests, std::size_t hosts)
{
    if (hosts == 0) return {};
    const auto n = static_cast<std::int64_t>(hosts);
    std::vector<std::int64_t> out(hosts, requests / n);
    const auto rest = static_cast<std::size_t>(requests % n);
    for (std::size_t i = 0; i < rest; ++i) ++out[i];
    return out;
}

HostLoad derive_utilization(HostState& host, std::int64_t assigned, double capacity,
                            std::span<const ContainerSpec> specs)
{
    HostLoad load;
    load.demand = static_cast<double>(assigned) / capacity;
    double sum = 0.0;
    for (auto& inst : host.instances) {
        const double w = specs[inst.spec_index].weight;
        if (inst.active) {
            inst.utilization = std::min(1.0, load.demand * w);
            sum += inst.utilization;
            load.raw += load.demand * w;
        } else {
            inst.utilization = 0.0;
        }
    }
    host.utilization = std::clamp(sum, 0.0, 1.0);
    return load;
}

ResponseBatch synthesize_response(std::int64_t requests, double utilization, double raw_demand,
                                  const ResponseModel& model, Rng& rng)
{
    ResponseBatch batch;
    if (requests <= 0) return batch;
    if (raw_demand > 1.0) {
        const double failed = static_cast<double>(requests) * (raw_demand - 1.0) / raw_demand;
        batch.errors = std::min<std::int64_t>(requests, std::llround(failed));
    }
    const double mean = model.base_ms / (1.0 - std::min(utilization, 0.99));
    const auto served = requests - batch.errors;
    batch.samples_ms.reserve(static_cast<std::size_t>(served));
    for (std::int64_t i = 0; i < served; ++i)
        batch.samples_ms.push_back(mean * (1.0 + rng.uniform(-model.jitter, model.jitter)));
    return batch;
}

std::string host_id(int index) { return fmt::format("h{:03}", index); }

Simulator::Simulator(SimConfig config, Trace trace)
    : config_(std::move(config)),
      trace_(std::move(trace)),
      response_rng_(config_.policy.seed),
      selector_rng_(config_.policy.seed ^ selector_stream),
      selector_(selector_for(config_.policy_name))
{
    if (auto violations = validate_config(config_); !violations.empty()) {
        std::string msg = "invalid config:";
        for (const auto& v : violations) msg += fmt::format(" {}: {};", v.field, v.rule);
        throw std::invalid_argument(msg);
    }
    if (!(trace_.interval_seconds > 0)) throw std::invalid_argument("trace interval must be positive");

    fleet_ = config_.fleet_size();
    const int initial = config_.hosts.initial_active.value_or(fleet_);
    hosts_.resize(static_cast<std::size_t>(fleet_));
    added_now_.assign(hosts_.size(), false);
    active_intervals_.assign(hosts_.size(), 0);
    overloaded_intervals_.assign(hosts_.size(), 0);
    for (int i = 0; i < fleet_; ++i) {
        auto& h = hosts_[static_cast<std::size_t>(i)];
        h.id = host_id(i);
        if (i < initial) activate(h);
    }
}

void Simulator::activate(HostState& host)
{
    host.mode = HostMode::active;
    host.boot_remaining = 0;
    host.instances.clear();
    for (std::size_t s = 0; s < config_.services.size(); ++s) {
        const auto& spec = config_.services[s];
        for (int r = 0; r < spec.replicas; ++r) {
            ContainerInstance inst;
            inst.id = fmt::format("{}/{}.{}", host.id, spec.id, r);
            inst.spec_id = spec.id;
            inst.host_id = host.id;
            inst.spec_index = s;
            host.instances.push_back(std::move(inst));
        }
    }
}

int Simulator::target_for(double predicted) const
{
    const auto& pol = config_.policy;
    int active = 0;
    int booting = 0;
    for (const auto& h : hosts_) {
        if (h.mode == HostMode::active) ++active;
        if (h.mode == HostMode::booting) ++booting;
    }
    if (uses_brownout(config_.policy_name) && pol.brownout_defers_scale_out)
        return brownout_aware_target(active + booting, predicted, pol.capacity, fleet_, pol.min_active_hosts,
                                     optional_share(config_.services));
    return autoscale(active, predicted, pol.capacity, fleet_, pol.min_active_hosts);
}

void Simulator::scale(int target)
{
    int active = 0;
    int booting = 0;
    for (const auto& h : hosts_) {
        if (h.mode == HostMode::active) ++active;
        if (h.mode == HostMode::booting) ++booting;
    }
    const int committed = active + booting;

    if (target > committed) {
        int need = target - committed;
        for (std::size_t i = 0; i < hosts_.size() && need > 0; ++i) {
            auto& h = hosts_[i];
            if (h.mode != HostMode::sleep && h.mode != HostMode::off) continue;
            --need;
            if (config_.policy.boot_delay == 0) {
                activate(h);
                continue;
            }
            h.mode = HostMode::booting;
            h.boot_remaining = config_.policy.boot_delay;
            added_now_[i] = true;
        }
    } else if (target < committed) {
        // Booting hosts finish booting; only active hosts go to sleep.
        const int keep = std::max(config_.policy.min_active_hosts, target - booting);
        for (auto i = hosts_.size(); i-- > 0 && active > keep;) {
            auto& h = hosts_[i];
            if (h.mode != HostMode::active) continue;
            h.mode = HostMode::sleep;
            h.instances.clear();
            h.utilization = 0.0;
            --active;
        }
    }
}

void Simulator::advance_booting()
{
    for (std::size_t i = 0; i < hosts_.size(); ++i) {
        auto& h = hosts_[i];
        if (h.mode != HostMode::booting || added_now_[i]) continue;
        if (--h.boot_remaining <= 0) activate(h);
    }
}

void Simulator::brownout(std::vector<HostLoad>& loads, std::span<const std::size_t> active,
                         std::span<const std::int64_t> assigned)
{
    const auto& profile = config_.hosts.profile;
    const auto& specs = config_.services;

    // Hosts are judged with every container running, so a host whose load
    // fits only because of an earlier deactivation is not counted as fine.
    std::vector<HostSnapshot> snaps;
    snaps.reserve(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
        const auto& h = hosts_[active[k]];
        const double d = loads[k].demand;
        HostSnapshot s;
        s.id = h.id;
        double full = 0.0;
        for (const auto& inst : h.instances) {
            const auto& spec = specs[inst.spec_index];
            const double u = std::min(1.0, d * spec.weight);
            full += u;
            if (spec.optional) s.optional.push_back({inst.id, u, spec.connection_tag});
        }
        s.utilization = std::clamp(full, 0.0, 1.0);
        s.power = hum(profile, HostMode::active, s.utilization);
        snaps.push_back(std::move(s));
    }

    const auto start = std::chrono::steady_clock::now();
    const auto decision =
        brownout_step(snaps, fleet_, config_.policy.overloaded_threshold, profile, *selector_, selector_rng_);
    timing_.brownout_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ++timing_.brownout_invocations;
    timing_.selector_calls += decision.selector_calls;
    timing_.selector_seconds += decision.selector_seconds;

    for (std::size_t k = 0; k < active.size(); ++k) {
        auto& h = hosts_[active[k]];
        bool changed = false;
        if (decision.reactivate_all) {
            for (auto& inst : h.instances) {
                changed |= !inst.active;
                inst.active = true;
            }
        } else if (auto it = decision.per_host.find(h.id); it != decision.per_host.end()) {
            const std::set<std::string> dcl(it->second.begin(), it->second.end());
            for (auto& inst : h.instances) {
                const bool want = !(specs[inst.spec_index].optional && dcl.count(inst.id));
                changed |= inst.active != want;
                inst.active = want;
            }
        }
        if (changed) {
            loads[k] = derive_utilization(h, assigned[k], config_.policy.capacity, specs);
            h.power = hum(profile, HostMode::active, h.utilization);
        }
    }
}

IntervalRecord Simulator::step()
{
    if (done()) throw std::out_of_range("simulation already finished");
    const int t = t_;
    const auto& pol = config_.policy;
    const auto& profile = config_.hosts.profile;
    const auto requests = trace_.rates[static_cast<std::size_t>(t)];
    std::fill(added_now_.begin(), added_now_.end(), false);

    // (1)-(2) Prediction and auto-scaling. Nothing has been observed at t = 0.
    if (uses_autoscaling(config_.policy_name) && t > 0) {
        const std::span<const std::int64_t> history(trace_.rates.data(), static_cast<std::size_t>(t));
        const double predicted = pol.prediction == PredictionMethod::ewma
                                     ? predict_rate_ewma(history, pol.window_size, pol.ewma_alpha)
                                     : predict_rate(history, pol.window_size);
        scale(target_for(predicted));
    }

    // (3)
    advance_booting();

    // (4)-(5)
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < hosts_.size(); ++i)
        if (hosts_[i].mode == HostMode::active) active.push_back(i);
    const auto assigned = route_demand(requests, active.size());
    std::vector<HostLoad> loads;
    loads.reserve(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
        auto& h = hosts_[active[k]];
        loads.push_back(derive_utilization(h, assigned[k], pol.capacity, config_.services));
        h.power = hum(profile, HostMode::active, h.utilization);
    }

    // (6)-(7)
    if (selector_ && !active.empty()) brownout(loads, active, assigned);

    // (8)
    IntervalRecord rec;
    rec.t = t;
    rec.requests = requests;
    rec.active_hosts = static_cast<int>(active.size());
    if (active.empty()) rec.errors = requests;
    for (std::size_t k = 0; k < active.size(); ++k) {
        const auto& h = hosts_[active[k]];
        auto batch = synthesize_response(assigned[k], h.utilization, loads[k].raw, config_.response, response_rng_);
        rec.errors += batch.errors;
        rec.response_samples_ms.insert(rec.response_samples_ms.end(), batch.samples_ms.begin(),
                                       batch.samples_ms.end());
    }

    // (9)
    std::map<std::string, double> powers;
    rec.per_host.reserve(hosts_.size());
    for (std::size_t i = 0; i < hosts_.size(); ++i) {
        auto& h = hosts_[i];
        if (h.mode != HostMode::active) {
            h.utilization = 0.0;
            h.power = hum(profile, h.mode, 0.0);
        }
        powers[h.id] = h.power;
        const bool overloaded = h.mode == HostMode::active && h.utilization > pol.overloaded_threshold;
        rec.per_host.push_back({h.utilization, h.power, overloaded});
        if (h.mode == HostMode::active) {
            ++active_intervals_[i];
            if (overloaded) ++overloaded_intervals_[i];
            rec.deactivated_containers += static_cast<int>(
                std::count_if(h.instances.begin(), h.instances.end(), [](const auto& c) { return !c.active; }));
        }
    }
    energy_ = accumulate_energy(std::move(energy_), powers, trace_.interval_seconds);

    // (10)
    records_.push_back(rec);
    ++t_;
    return rec;
}

RunResult Simulator::run()
{
    while (!done()) step();

    RunResult r;
    r.policy = config_.policy_name;
    r.seed = config_.policy.seed;
    r.fleet_size = fleet_;
    r.interval_seconds = trace_.interval_seconds;
    r.energy_kwh = energy_.total_kwh();
    r.energy_per_host_wh = energy_.per_host_wh;
    r.percentile_k = config_.policy.percentile_k;

    for (std::size_t i = 0; i < hosts_.size(); ++i) {
        if (active_intervals_[i] == 0) continue;
        r.otr_per_host[hosts_[i].id] =
            static_cast<double>(overloaded_intervals_[i]) / static_cast<double>(active_intervals_[i]);
    }
    r.otr_mean = otr_mean(r.otr_per_host);

    std::vector<double> samples;
    for (const auto& rec : records_) {
        r.total_requests += rec.requests;
        r.total_errors += rec.errors;
        r.active_host_series.push_back(rec.active_hosts);
        samples.insert(samples.end(), rec.response_samples_ms.begin(), rec.response_samples_ms.end());
    }
    if (!samples.empty()) {
        r.avg_response_ms = mean(samples);
        r.p_kth_response_ms = percentile(samples, r.percentile_k);
    }
    r.slavr = slavr(r.total_errors, r.total_requests);
    r.interval_records = records_;
    r.timing = timing_;
    return r;
}

RunResult run_simulation(const SimConfig& config, const Trace& trace)
{
    Simulator sim(config, trace);
    return sim.run();
}

} // namespace brownsim
