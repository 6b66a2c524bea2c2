#include "tsci/pipeline.hpp"

#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace tsci;
using namespace tsci::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("tsci_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig small_config(const fs::path& out) {
    RunConfig c;
    c.input_length = 128;
    c.horizons = {24};
    c.slice_count = 3;
    c.out_dir = out.string();
    return c;
}

Series window(const std::vector<double>& x, std::size_t begin, std::size_t length) {
    return Series(std::vector<double>(x.begin() + static_cast<long>(begin), x.begin() + static_cast<long>(begin + length)));
}

std::string decision_of(const WorkflowLog& log, const std::string& stage) {
    const auto e = log.find(stage);
    REQUIRE(e.has_value());
    return e->decision.dump();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("csv ingestion") {
    std::istringstream named("t,value\n0,1.5\n1,\n2,3\n");
    const auto s = parse_csv(named, "value");
    REQUIRE(s.size() == 3);
    CHECK(s.value(0) == 1.5);
    CHECK(s.is_missing(1));
    CHECK(s.value(2) == 3.0);

    std::istringstream by_index("a,b\n1,10\n2,20\n");
    CHECK(parse_csv(by_index, "1").dense() == std::vector<double>{10, 20});

    std::istringstream bad("t,value\n0,1\n1,abc\n");
    try {
        (void)parse_csv(bad, "value", "bad.csv");
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
        CHECK(std::string(e.what()).find('3') != std::string::npos);
    }
    std::istringstream inf("t,value\n0,inf\n");
    CHECK_THROWS(parse_csv(inf, "value"));
    std::istringstream no_col("t,value\n0,1\n");
    CHECK_THROWS(parse_csv(no_col, "price"));
    CHECK_THROWS(ingest_csv("/nonexistent/file.csv", "value"));

    const auto bundled = ingest_csv(source_path("data/synthetic_seasonal.csv"), "value");
    CHECK(bundled.size() == 3000);
    CHECK(bundled.has_missing());
}

TEST_CASE("slice placement") {
    const Series exact(std::vector<double>(512 + 96, 1.0));
    const auto one = make_slices(exact, 512, 25, 96);
    REQUIRE(one.windows.size() == 1);
    CHECK(one.windows[0].start == 0);
    CHECK(one.warnings.size() == 1);

    const Series roomy(std::vector<double>(512 + 96 + 24, 1.0));
    const auto many = make_slices(roomy, 512, 25, 96);
    REQUIRE(many.windows.size() == 25);
    for (std::size_t i = 0; i < 25; ++i) CHECK(many.windows[i].start == i);
    CHECK(many.warnings.empty());

    std::vector<double> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const auto plan = make_slices(Series(x), 100, 4, 50);
    REQUIRE(plan.windows.size() == 4);
    CHECK(plan.windows[0].start == 0);
    CHECK(plan.windows[1].start == 283);
    CHECK(plan.windows[2].start == 567);
    CHECK(plan.windows[3].start == 850);
    for (const auto& w : plan.windows) {
        CHECK(w.input.size() == 100);
        CHECK(w.test.size() == 50);
        CHECK(w.input.value(0) == static_cast<double>(w.start));
        CHECK(w.test.value(0) == static_cast<double>(w.start + 100));
    }
    CHECK_THROWS_AS(make_slices(Series(std::vector<double>(10, 1.0)), 8, 1, 3), std::invalid_argument);
    CHECK_THROWS(make_slices(exact, 512, 0, 96));
}

TEST_CASE("the test window is released once, after the decision") {
    WorkflowLog log;
    TestWindowGuard guard(Series(std::vector<double>{1, 2, 3}));
    CHECK_THROWS_AS(guard.read(log), std::logic_error);
    CHECK_FALSE(guard.consumed());
    log.append("ensemble", {});
    CHECK(guard.read(log).size() == 3);
    CHECK(guard.consumed());
    CHECK(log.contains("test_read"));
    CHECK_THROWS_AS(guard.read(log), std::logic_error);
}

TEST_CASE("run config validation and json") {
    RunConfig c;
    CHECK_NOTHROW(c.validate());
    c.input_length = 10;
    CHECK_THROWS(c.validate());
    c = RunConfig{};
    c.horizons = {};
    CHECK_THROWS(c.validate());
    c = RunConfig{};
    c.top_k = 0;
    CHECK_THROWS(c.validate());

    RunConfig d;
    from_json(nlohmann::json::parse(R"({"slices": 7, "ensemble": {"lambda": 0.2}})"), d);
    CHECK(d.slice_count == 7);
    CHECK(d.ensemble.lambda == 0.2);
    CHECK(d.ensemble.delta == EnsembleConfig{}.delta);
    CHECK(d.input_length == 512);
    CHECK_THROWS(from_json(nlohmann::json::parse(R"({"slcies": 7})"), d));
    RunConfig e;
    from_json(nlohmann::json(d), e);
    CHECK(nlohmann::json(e) == nlohmann::json(d));
}

TEST_CASE("a slice replays bit-exactly from its log") {
    const auto x = seasonal_series(200, 6, 1.2, 0.02);
    TestWindowGuard guard(window(x, 160, 24));
    const auto run = run_slice(window(x, 32, 128), guard, 24, small_config(scratch_dir("replay")));
    CHECK(run.forecast == logged_forecast(run.log));
    const auto text = run.log.to_ndjson();
    const auto rebuilt = rebuild_from_log(WorkflowLog::from_ndjson(text));
    CHECK(rebuilt.forecast == run.forecast);
    CHECK(render_report(rebuilt.report) == render_report(run.report));
    CHECK(render_plots(rebuilt.plots) == render_plots(run.plots));
}

TEST_CASE("corrupting the test window changes no decision") {
    const auto x = seasonal_series(200, 9, 1.0, 0.01);
    const auto config = small_config(scratch_dir("leak"));
    TestWindowGuard clean_guard(window(x, 128, 24));
    const auto clean = run_slice(window(x, 0, 128), clean_guard, 24, config);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> wild(-1e6, 1e6);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::optional<double>> junk(24);
        for (auto& v : junk)
            if (rng() % 5) v = wild(rng);
        TestWindowGuard guard{Series(junk)};
        const auto dirty = run_slice(window(x, 0, 128), guard, 24, config);
        for (const char* stage : {"diagnose", "preprocess", "profile", "select", "backtest", "ensemble", "forecast"})
            CHECK_MESSAGE(decision_of(dirty.log, stage) == decision_of(clean.log, stage), stage);
        CHECK(dirty.forecast == clean.forecast);
    }
}

TEST_CASE("pipeline outputs, aggregation and determinism") {
    const auto x = seasonal_series(400, 2, 1.0, 0.01);
    const auto dir_a = scratch_dir("pipe_a");
    auto config = small_config(dir_a);
    config.horizons = {24, 48};
    config.slice_count = 2;
    const auto a = run_pipeline(Series(x), config);
    REQUIRE(a.slices.size() == 4);
    for (const auto& s : a.slices) CHECK(s.ok);

    for (std::size_t h : {24u, 48u}) {
        for (std::size_t i = 0; i < 2; ++i) {
            const auto dir = dir_a / ("h" + std::to_string(h)) / slice_dir_name(i);
            for (const char* f : {"report.md", "metrics.csv", "log.ndjson", "plots/overview.svg", "plots/decomposition.svg",
                                  "plots/correlogram.svg", "plots/ensemble_forecast.svg"})
                CHECK_MESSAGE(fs::exists(dir / f), (dir / f).string());
        }
    }
    CHECK(fs::exists(dir_a / "aggregate.csv"));
    CHECK(fs::exists(dir_a / "slices.csv"));
    CHECK(fs::exists(dir_a / "config.json"));

    REQUIRE(a.aggregates.size() == 2);
    for (const auto& agg : a.aggregates) {
        double mae_sum = 0.0, mape_sum = 0.0;
        std::size_t n = 0;
        for (const auto& s : a.slices)
            if (s.horizon == agg.horizon && s.ensemble_test) {
                mae_sum += s.ensemble_test->mae;
                mape_sum += s.ensemble_test->mape;
                ++n;
            }
        CHECK(agg.included == n);
        CHECK(std::fabs(agg.mae - mae_sum / static_cast<double>(n)) <= 1e-9);
        CHECK(std::fabs(agg.mape - mape_sum / static_cast<double>(n)) <= 1e-9);
    }
    REQUIRE(a.average.has_value());
    CHECK(std::fabs(a.average->mae - 0.5 * (a.aggregates[0].mae + a.aggregates[1].mae)) <= 1e-12);

    auto config_b = config;
    config_b.out_dir = scratch_dir("pipe_b").string();
    config_b.workers = 3;
    const auto b = run_pipeline(Series(x), config_b);
    CHECK(aggregate_csv(b) == aggregate_csv(a));
    CHECK(slices_csv(b) == slices_csv(a));
    CHECK(slurp(fs::path(config_b.out_dir) / "h24" / slice_dir_name(1) / "report.md") ==
          slurp(dir_a / "h24" / slice_dir_name(1) / "report.md"));
}

TEST_CASE("a failing slice is recorded and excluded") {
    auto x = seasonal_series(400, 4, 1.0);
    std::vector<std::optional<double>> slots(x.begin(), x.end());
    // The first window loses half its input; the 20% missing limit rejects it.
    for (std::size_t i = 0; i < 64; ++i) slots[i] = std::nullopt;
    const auto dir = scratch_dir("fail");
    auto config = small_config(dir);
    const auto summary = run_pipeline(Series(slots), config);
    REQUIRE(summary.slices.size() == 3);
    CHECK_FALSE(summary.slices[0].ok);
    CHECK_FALSE(summary.slices[0].error.empty());
    CHECK(summary.slices[1].ok);
    CHECK(summary.slices[2].ok);
    REQUIRE(summary.aggregates.size() == 1);
    CHECK(summary.aggregates[0].included == 2);
    CHECK(summary.aggregates[0].failed == 1);
    const auto failed_dir = dir / "h24" / slice_dir_name(0);
    CHECK(fs::exists(failed_dir / "error.txt"));
    const auto log = WorkflowLog::from_ndjson(slurp(failed_dir / "log.ndjson"));
    CHECK(log.events().back().stage == "failed");
    CHECK(slices_csv(summary).find("failed") != std::string::npos);
}
