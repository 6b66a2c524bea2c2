#include "tsci/pipeline.hpp"
#include "tsci/reporter.hpp"

#include "support.hpp"

#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

using namespace tsci;
using namespace tsci::testing;
namespace pt = boost::property_tree;

namespace {

RunConfig small_config() {
    RunConfig c;
    c.input_length = 256;
    c.horizons = {24};
    return c;
}

SliceRun sample_run(std::uint64_t seed = 3) {
    const auto x = seasonal_series(280, seed, 1.0, 0.01);
    const Series input(std::vector<double>(x.begin(), x.begin() + 256));
    TestWindowGuard guard(Series(std::vector<double>(x.begin() + 256, x.end())));
    return run_slice(input, guard, 24, small_config(), nullptr, "sample");
}

/// Every <path> under the tree, as (data-series, d) pairs.
void collect_paths(const pt::ptree& node, std::vector<std::pair<std::string, std::string>>& out) {
    for (const auto& [name, child] : node) {
        if (name == "path")
            out.emplace_back(child.get<std::string>("<xmlattr>.data-series", ""), child.get<std::string>("<xmlattr>.d", ""));
        if (name != "<xmlattr>") collect_paths(child, out);
    }
}

void collect_reference_y(const pt::ptree& node, std::vector<double>& out) {
    for (const auto& [name, child] : node) {
        if (name == "line" && child.get<std::string>("<xmlattr>.class", "") == "reference")
            out.push_back(child.get<double>("<xmlattr>.y1"));
        if (name != "<xmlattr>") collect_reference_y(child, out);
    }
}

pt::ptree parse_svg(const std::string& svg) {
    std::istringstream in(svg);
    pt::ptree tree;
    pt::read_xml(in, tree);
    return tree;
}

}  // namespace

TEST_CASE("interval examples") {
    const auto f = build_intervals({{2.0}, {4.0}}, std::vector<double>{3.0}, 0.0);
    // Population variance of {2, 4} is 1.
    CHECK(f.lower[0] == doctest::Approx(3.0 - 1.959963984540054).epsilon(1e-12));
    CHECK(f.upper[0] == doctest::Approx(3.0 + 1.959963984540054).epsilon(1e-12));

    const auto resid = build_intervals({{5.0}}, std::vector<double>{5.0}, 2.0);
    CHECK(resid.upper[0] - resid.point[0] == doctest::Approx(2.0 * 1.959963984540054));

    const std::vector<std::vector<double>> m{{1, 2, 3}, {2, 2, 5}, {0, 3, 4}};
    const std::vector<double> p{1, 2.3, 4};
    const auto i95 = build_intervals(m, p, 0.5, 95.0);
    const auto i99 = build_intervals(m, p, 0.5, 99.0);
    for (std::size_t t = 0; t < p.size(); ++t) {
        CHECK(i99.lower[t] <= i95.lower[t]);
        CHECK(i99.upper[t] >= i95.upper[t]);
        CHECK(i95.lower[t] <= p[t]);
        CHECK(i95.upper[t] >= p[t]);
    }
    CHECK_THROWS(build_intervals({}, p, 0.5));
    CHECK_THROWS(build_intervals(m, p, -1.0));
    CHECK_THROWS(build_intervals(m, p, 0.5, 100.0));
}

TEST_CASE("intervals reach nominal coverage when the residual model holds") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::size_t inside = 0, total = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const double sigma = 0.5 + 0.01 * trial;
        std::vector<double> point(24);
        for (auto& v : point) v = 10.0 * noise(rng);
        const auto f = build_intervals({point, point}, point, sigma, 95.0);
        for (std::size_t t = 0; t < point.size(); ++t) {
            const double y = point[t] + sigma * noise(rng);
            inside += y >= f.lower[t] && y <= f.upper[t];
            ++total;
        }
    }
    CHECK(static_cast<double>(inside) >= 0.85 * static_cast<double>(total));
}

TEST_CASE("workflow log sequencing and ndjson round trip") {
    WorkflowLog log;
    CHECK(log.append("diagnose", {{"a", 1}}) == 1);
    CHECK(log.append("preprocess", {{"b", 2}}, "rules") == 2);
    CHECK_THROWS(log.log_event("late", {}, 2));
    CHECK_NOTHROW(log.log_event("jump", {}, 10));
    CHECK(log.append("after", {}) == 11);
    const auto events = log.events();
    for (std::size_t i = 1; i < events.size(); ++i) CHECK(events[i].seq > events[i - 1].seq);
    for (const auto& e : events) CHECK(std::regex_match(e.timestamp, std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\d.*Z)")));

    const auto text = log.to_ndjson();
    CHECK(text.find(kLogSchema) != std::string::npos);
    const auto back = WorkflowLog::from_ndjson(text);
    CHECK(back.to_ndjson() == text);
    CHECK(back.find("preprocess")->provenance == "rules");
    CHECK_FALSE(back.contains("nothing"));
    CHECK_THROWS(WorkflowLog::from_ndjson("{not json"));
}

TEST_CASE("concurrent appends keep strictly increasing sequence numbers") {
    WorkflowLog log;
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&log, t] {
            for (int i = 0; i < 250; ++i) log.append("worker", {{"t", t}, {"i", i}});
        });
    for (auto& th : threads) th.join();
    const auto events = log.events();
    REQUIRE(events.size() == 1000);
    for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].seq == i + 1);
}

TEST_CASE("slice log follows the stage order") {
    const auto run = sample_run();
    std::vector<std::string> stages;
    for (const auto& e : run.log.events()) stages.push_back(e.stage);
    const std::vector<std::string> expected{"diagnose", "preprocess", "profile",   "select", "backtest",
                                            "ensemble", "forecast",   "test_read", "score",  "report"};
    CHECK(stages == expected);
}

TEST_CASE("report sections appear once and in order") {
    const auto run = sample_run();
    const auto md = render_report(run.report);
    std::size_t last = 0;
    for (const auto& s : report_sections()) {
        const auto pos = md.find("## " + s);
        REQUIRE_MESSAGE(pos != std::string::npos, s);
        CHECK(pos >= last);
        CHECK(md.find("## " + s, pos + 1) == std::string::npos);
        last = pos;
    }
    CHECK(render_report(run.report) == md);
    CHECK(sample_run().report.decision.strategy == run.report.decision.strategy);
    CHECK(render_report(sample_run().report) == md);
    if (run.report.decision.strategy == EnsembleStrategy::single_best)
        CHECK(md.find(run.report.decision.selected_model) != std::string::npos);
    for (const auto& f : run.report.plot_files) CHECK(md.find(f) != std::string::npos);
}

TEST_CASE("metrics csv has one row per member plus the ensemble") {
    const auto run = sample_run();
    const auto csv = metrics_csv(run.report);
    std::istringstream in(csv);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "model_id,params,val_mae,val_mape,test_mae,test_mape");
    std::size_t rows = 0;
    std::string last;
    while (std::getline(in, line))
        if (!line.empty()) {
            ++rows;
            last = line;
        }
    CHECK(rows == run.report.members.size() + 1);
    CHECK(last.rfind("ensemble,", 0) == 0);
}

TEST_CASE("svg files parse and draw each series once") {
    const auto run = sample_run();
    const auto plots = render_plots(run.plots);
    const std::set<std::string> names{"overview.svg", "decomposition.svg", "correlogram.svg", "ensemble_forecast.svg"};
    REQUIRE(plots.size() == 4);
    for (const auto& [name, svg] : plots) {
        CHECK(names.count(name) == 1);
        const auto tree = parse_svg(svg);
        CHECK(tree.count("svg") == 1);
        std::vector<std::pair<std::string, std::string>> paths;
        collect_paths(tree, paths);
        std::set<std::string> seen;
        for (const auto& [series, d] : paths) CHECK_MESSAGE(seen.insert(series).second, name << ": " << series);
        if (name == "overview.svg") CHECK(seen == std::set<std::string>{"series", "rolling mean", "rolling std"});
        if (name == "decomposition.svg")
            CHECK(seen == std::set<std::string>{"observed", "trend", "seasonal", "residual"});
        if (name == "correlogram.svg") CHECK(seen == std::set<std::string>{"acf", "pacf"});
        if (name == "ensemble_forecast.svg") {
            CHECK(seen.count("history") == 1);
            CHECK(seen.count("ensemble") == 1);
            CHECK(seen.count("actual") == 1);
            for (const auto& m : run.plots.member_names) CHECK(seen.count(m) == 1);
        }
    }
    CHECK(render_plots(run.plots) == plots);
}

TEST_CASE("correlogram band sits at 1.96/sqrt(n)") {
    PlotData data;
    data.series = white_noise(512, 4);
    data.decomposition = decompose(data.series, 24);
    data.correlogram = acf_pacf(data.series, 40);
    data.member_names = {"a"};
    data.member_forecasts = {std::vector<double>(8, 0.0)};
    data.intervals = build_intervals(data.member_forecasts, data.member_forecasts[0], 1.0);
    const auto tree = parse_svg(render_plots(data).at("correlogram.svg"));

    std::vector<std::pair<std::string, std::string>> paths;
    collect_paths(tree, paths);
    REQUIRE_FALSE(paths.empty());
    REQUIRE(paths.front().first == "acf");
    // The lag-0 stem runs from y(0) to y(1) and fixes the vertical scale.
    const std::regex stem(R"(^M[-\d.]+,([-\d.]+)L[-\d.]+,([-\d.]+))");
    std::smatch m;
    REQUIRE(std::regex_search(paths.front().second, m, stem));
    const double y0 = std::stod(m[1]), y1 = std::stod(m[2]);
    std::vector<double> refs;
    collect_reference_y(tree, refs);
    REQUIRE(refs.size() == 4);
    const double band = (y0 - std::min(refs[0], refs[1])) / (y0 - y1);
    CHECK(std::fabs(band - 1.96 / std::sqrt(512.0)) < 0.005);
}
