#include "support.hpp"

#include "brownsim/experiment.hpp"

#include <doctest.h>

using namespace brownsim;

namespace {

ExperimentSpec spec_with(std::vector<SweepAxis> axes, int reps, const std::string& dir)
{
    ExperimentSpec s;
    s.base = testing::sample_config();
    s.axes = std::move(axes);
    s.repetitions = reps;
    s.output_dir = testing::scratch_dir(dir);
    return s;
}

std::vector<std::string> labels(const std::vector<Cell>& cells)
{
    std::vector<std::string> out;
    for (const auto& c : cells) out.push_back(c.label);
    return out;
}

// Energy recomputed from intervals.csv: total_power_w * interval / 3600.
double energy_from_csv(const std::filesystem::path& path, double interval_seconds)
{
    std::istringstream in(testing::slurp(path));
    std::string line;
    std::getline(in, line);
    double wh = 0.0;
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::stringstream ss(line);
        for (std::string col; std::getline(ss, col, ',');) cols.push_back(col);
        REQUIRE(cols.size() == 7);
        wh += std::stod(cols[3]) * interval_seconds / 3600.0;
    }
    return wh / 1000.0;
}

} // namespace

TEST_CASE("cell expansion")
{
    const auto three = expand_cells(spec_with({{"policy_name", {"NPA", "AUTOS", "LUCF"}}}, 1, "x1"));
    CHECK(labels(three) == std::vector<std::string>{"NPA", "AUTOS", "LUCF-30"});

    const auto lucf = expand_cells(spec_with({{"optional_util_pct", {"0.1", "0.2", "0.3", "0.4"}}}, 1, "x2"));
    CHECK(labels(lucf) == std::vector<std::string>{"LUCF-10", "LUCF-20", "LUCF-30", "LUCF-40"});
    for (const auto& c : lucf) CHECK(validate_config(c.config).empty());

    const auto reps = expand_cells(spec_with({{"policy_name", {"MNCF"}}}, 3, "x3"));
    REQUIRE(reps.size() == 3);
    for (int r = 0; r < 3; ++r) {
        CHECK(reps[static_cast<std::size_t>(r)].repetition == r);
        CHECK(reps[static_cast<std::size_t>(r)].config.policy.seed == 42u + static_cast<unsigned>(r));
    }

    const auto grid = expand_cells(spec_with({{"policy_name", {"LUCF", "RSC"}}, {"overloaded_threshold_u_t", {"0.6", "0.9"}}}, 2, "x4"));
    CHECK(grid.size() == 8);
    std::set<std::string> dirs;
    for (const auto& c : grid) dirs.insert(c.directory);
    CHECK(dirs.size() == grid.size());
}

TEST_CASE("experiment validation")
{
    CHECK(validate_experiment(spec_with({{"policy_name", {"NPA"}}}, 1, "v0")).empty());
    CHECK_FALSE(validate_experiment(spec_with({{"policy_name", {"BOGUS"}}}, 1, "v1")).empty());
    CHECK_FALSE(validate_experiment(spec_with({{"window", {"3"}}}, 1, "v2")).empty());
    CHECK_FALSE(validate_experiment(spec_with({{"overloaded_threshold_u_t", {"0.3"}}}, 1, "v3")).empty());
    CHECK_FALSE(validate_experiment(spec_with({{"optional_util_pct", {"abc"}}}, 1, "v4")).empty());
    CHECK_FALSE(validate_experiment(spec_with({}, 0, "v5")).empty());
}

TEST_CASE("compare writes per-cell outputs and a summary")
{
    auto spec = spec_with({{"policy_name", {"NPA", "AUTOS", "LUCF"}}}, 2, "cmp");
    const auto rows = run_experiment(spec, 2);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].label == "NPA");
    CHECK(rows[1].seed == 43);

    const auto cells = expand_cells(spec);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto dir = spec.output_dir / cells[i].directory;
        REQUIRE(std::filesystem::exists(dir / "result.json"));
        REQUIRE(std::filesystem::exists(dir / "intervals.csv"));
        CHECK(std::abs(energy_from_csv(dir / "intervals.csv", 60) - rows[i].energy_kwh) <= 1e-6);
        CHECK_FALSE(std::filesystem::exists(dir / "result.json.tmp"));
    }

    const auto csv = testing::slurp(spec.output_dir / "summary.csv");
    const auto txt = testing::slurp(spec.output_dir / "summary.txt");
    CHECK(csv.rfind("# ", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
    CHECK(txt.find("LUCF-30") != std::string::npos);

    // Report mode rebuilds identical files.
    std::filesystem::remove(spec.output_dir / "summary.csv");
    std::filesystem::remove(spec.output_dir / "summary.txt");
    report_experiment(spec.output_dir);
    CHECK(testing::slurp(spec.output_dir / "summary.csv") == csv);
    CHECK(testing::slurp(spec.output_dir / "summary.txt") == txt);
}

TEST_CASE("parallel and serial sweeps agree")
{
    auto a = spec_with({{"policy_name", {"RSC", "MNCF"}}, {"optional_util_pct", {"0.2", "0.4"}}}, 1, "par_a");
    auto b = a;
    b.output_dir = testing::scratch_dir("par_b");
    run_experiment(a, 1);
    run_experiment(b, 4);
    CHECK(testing::slurp(a.output_dir / "summary.csv") == testing::slurp(b.output_dir / "summary.csv"));
    for (const auto& c : expand_cells(a))
        CHECK(testing::slurp(a.output_dir / c.directory / "result.json") ==
              testing::slurp(b.output_dir / c.directory / "result.json"));
}

TEST_CASE("experiment files")
{
    const auto dir = testing::scratch_dir("expfile");
    {
        std::ofstream f(dir / "exp.json");
        f << "// sweep\n{\"config\": \"" << (testing::data_dir / "sample.json").string()
          << "\", \"sweep\": {\"policy_name\": [\"AUTOS\", \"LUCF\"], \"optional_util_pct\": [0.2]},"
             " \"repetitions\": 2, \"output_dir\": \"out\"}";
    }
    const auto spec = load_experiment(dir / "exp.json");
    CHECK(spec.output_dir == dir / "out");
    CHECK(spec.repetitions == 2);
    REQUIRE(spec.axes.size() == 2);
    // Sweep keys come back in name order.
    CHECK(spec.axes[0].name == "optional_util_pct");
    CHECK(spec.axes[0].values == std::vector<std::string>{"0.2"});
    CHECK(labels(expand_cells(spec)) == std::vector<std::string>{"AUTOS", "AUTOS", "LUCF-20", "LUCF-20"});
}

TEST_CASE("summary table formatting")
{
    SummaryRow r;
    r.label = "NPA";
    r.policy = "NPA";
    r.overloaded_threshold = 0.8;
    r.energy_kwh = 69.71;
    r.avg_response_ms = 371.5;
    r.p_kth_response_ms = 1150.2;
    r.slavr = std::nullopt;
    const auto txt = summary_table({r});
    CHECK(txt.find("69.710") != std::string::npos);
    CHECK(txt.find(" -") != std::string::npos);
    const auto csv = summary_csv({r});
    CHECK(csv.find("NPA,NPA,0.80,0.00,0,0,69.710000,371.500000,1150.200000,95,,0.000000") != std::string::npos);
}
