// Request traces and request-rate prediction.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace brownsim {

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TraceNotFound : public TraceError {
public:
    using TraceError::TraceError;
};

struct Trace {
    double interval_seconds = 60.0;
    double scale = 1.0;
    // Requests per interval after scaling.
    std::vector<std::int64_t> rates;
};

// `scale` applied to a raw rate, rounded half-up.
std::int64_t scale_rate(double raw, double scale);

// Two-column CSV `t,requests`; an optional header row is skipped. Timestamps
// must be strictly increasing and rates non-negative.
Trace parse_trace(std::istream& in, double scale, double interval_seconds = 60.0);
Trace load_trace(const std::filesystem::path& path, double scale, double interval_seconds = 60.0);

// Sliding-window mean of the most recent min(window, history.size()) rates.
double predict_rate(std::span<const std::int64_t> history, int window);

// Exponentially weighted variant over the same window: the newest sample has
// weight 1, each older one is discounted by (1 - alpha).
double predict_rate_ewma(std::span<const std::int64_t> history, int window, double alpha);

struct DiurnalTraceParams {
    int intervals = 1440;
    double low = 1000.0;
    double peak = 6000.0;
    // Interval index of the daily minimum.
    int trough_at = 240;
    // Relative Gaussian noise per interval.
    double noise = 0.03;
};

// One day of raw request counts: a cosine between `low` and `peak` with
// multiplicative noise, rounded to whole requests.
std::vector<double> synthesize_diurnal_trace(const DiurnalTraceParams& params, std::uint64_t seed);

void write_trace_csv(std::ostream& out, std::span<const double> raw_rates);

} // namespace brownsim
