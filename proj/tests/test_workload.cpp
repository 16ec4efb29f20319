#include "support.hpp"

#include <doctest.h>
#include <sstream>

using namespace brownsim;

namespace {

Trace parse(const std::string& text, double scale = 1.0)
{
    std::istringstream in(text);
    return parse_trace(in, scale);
}

std::string error_of(const std::string& text)
{
    try {
        parse(text);
    } catch (const TraceError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("trace parsing and scaling")
{
    CHECK(parse("t,requests\n0,100\n1,120\n", 0.05).rates == std::vector<std::int64_t>{5, 6});
    CHECK(parse("0,100\n1,120\n").rates == std::vector<std::int64_t>{100, 120});
    // Comments, blank lines, CRLF and spaces are tolerated.
    CHECK(parse("# day one\r\n\r\n 0 , 7\r\n1,8\r\n").rates == std::vector<std::int64_t>{7, 8});
    // Half-up rounding.
    CHECK(parse("0,10\n1,30\n", 0.05).rates == std::vector<std::int64_t>{1, 2});
    CHECK(scale_rate(2.5, 1.0) == 3);
    CHECK(scale_rate(2.4999, 1.0) == 2);
}

TEST_CASE("trace errors carry line numbers")
{
    CHECK(error_of("0,5\n0,6\n").find("line 2") != std::string::npos);
    CHECK(error_of("0,5\n1,6\n0.5,7\n").find("strictly increasing") != std::string::npos);
    CHECK(error_of("0,5\n1,abc\n").find("line 2") != std::string::npos);
    CHECK(error_of("t,requests\n0,5\n1\n").find("line 3") != std::string::npos);
    CHECK(error_of("0,-3\n").find("negative") != std::string::npos);
    CHECK(error_of("0,1,2\n").find("line 1") != std::string::npos);
    CHECK(error_of("").find("no data") != std::string::npos);
    CHECK(error_of("t,requests\n").find("no data") != std::string::npos);
}

TEST_CASE("missing trace file")
{
    CHECK_THROWS_AS(load_trace("/nonexistent/trace.csv", 1.0), TraceNotFound);
}

TEST_CASE("sliding-window prediction")
{
    const std::vector<std::int64_t> h{10, 20, 30, 40, 50};
    CHECK(predict_rate(h, 5) == doctest::Approx(30).epsilon(1e-12));
    CHECK(predict_rate(std::vector<std::int64_t>{10, 20}, 5) == doctest::Approx(15));
    CHECK(predict_rate({}, 5) == 0.0);
    CHECK(predict_rate(h, 2) == doctest::Approx(45));
    CHECK(predict_rate(h, 1) == 50);
}

TEST_CASE("prediction stays inside the window range")
{
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::int64_t> h(1 + rng.below(30));
        for (auto& x : h) x = static_cast<std::int64_t>(rng.below(1000));
        const int w = 1 + static_cast<int>(rng.below(10));
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(w), h.size());
        const auto [lo, hi] = std::minmax_element(h.end() - static_cast<std::ptrdiff_t>(n), h.end());
        for (double p : {predict_rate(h, w), predict_rate_ewma(h, w, rng.uniform(0.05, 1.0))}) {
            CHECK(p >= static_cast<double>(*lo) - 1e-9);
            CHECK(p <= static_cast<double>(*hi) + 1e-9);
        }
    }
}

TEST_CASE("constant trace is predicted exactly after one interval")
{
    const std::vector<std::int64_t> h(12, 77);
    for (std::size_t t = 1; t <= h.size(); ++t) {
        const std::span<const std::int64_t> seen(h.data(), t);
        CHECK(predict_rate(seen, 5) == 77.0);
        CHECK(predict_rate_ewma(seen, 5, 0.3) == doctest::Approx(77.0));
    }
}

TEST_CASE("exponentially weighted prediction favours recent samples")
{
    const std::vector<std::int64_t> h{10, 20, 30, 40, 50};
    // alpha = 1 keeps only the newest sample.
    CHECK(predict_rate_ewma(h, 5, 1.0) == 50);
    // weights 1, 0.5 over {50, 40}
    CHECK(predict_rate_ewma(h, 2, 0.5) == doctest::Approx((50 + 0.5 * 40) / 1.5));
    CHECK(predict_rate_ewma(h, 5, 0.5) > predict_rate(h, 5));
}

TEST_CASE("shipped diurnal trace matches the generator")
{
    const auto raw = synthesize_diurnal_trace({}, 7);
    std::ostringstream expected;
    write_trace_csv(expected, raw);
    CHECK(testing::slurp(testing::data_dir / "diurnal_1440.csv") == expected.str());

    const auto trace = load_trace(testing::data_dir / "diurnal_1440.csv", 0.05);
    REQUIRE(trace.rates.size() == 1440);
    // Trough near interval 240, peak twelve hours later.
    const auto lo = std::min_element(trace.rates.begin(), trace.rates.end()) - trace.rates.begin();
    const auto hi = std::max_element(trace.rates.begin(), trace.rates.end()) - trace.rates.begin();
    CHECK(std::abs(lo - 240) < 90);
    CHECK(std::abs(hi - 960) < 90);
}

TEST_CASE("generator is deterministic per seed")
{
    DiurnalTraceParams p;
    p.intervals = 50;
    CHECK(synthesize_diurnal_trace(p, 1) == synthesize_diurnal_trace(p, 1));
    CHECK(synthesize_diurnal_trace(p, 1) != synthesize_diurnal_trace(p, 2));
    p.noise = 0;
    p.trough_at = 10;
    const auto flat = synthesize_diurnal_trace(p, 9);
    CHECK(flat[static_cast<std::size_t>(p.trough_at)] == p.low);
}
