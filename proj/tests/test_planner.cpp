#include "tsci/planner.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace tsci;
using namespace tsci::testing;

namespace {

TemporalProfile profile_with(bool seasonal, bool stationary, double trend_strength, double intermittency) {
    TemporalProfile p;
    p.seasonality.detected = seasonal;
    p.seasonality.period = seasonal ? 24 : 0;
    p.seasonality.strength = seasonal ? 0.8 : 0.05;
    p.stationarity.is_stationary = stationary;
    p.trend.strength = trend_strength;
    p.intermittency = intermittency;
    p.decomposition_period = 24;
    return p;
}

std::vector<ModelId> models_of(const CandidatePool& pool) {
    std::vector<ModelId> out;
    for (const auto& c : pool.candidates) out.push_back(c.model);
    return out;
}

BacktestRecord record(ModelId id, double mape, double mae) {
    BacktestRecord r;
    r.spec.id = id;
    r.val_mape = mape;
    r.val_mae = mae;
    r.status = BacktestStatus::ok;
    return r;
}

}  // namespace

TEST_CASE("candidate selection follows the rule table") {
    const auto seasonal = select_candidates(profile_with(true, false, 0.2, 0.0), 3);
    const auto m = models_of(seasonal);
    CHECK(std::set<ModelId>(m.begin(), m.end()) ==
          std::set<ModelId>{ModelId::exp_smoothing, ModelId::theta, ModelId::arima});

    const auto sparse = select_candidates(profile_with(false, true, 0.1, 0.6), 5);
    CHECK(sparse.candidates.front().model == ModelId::croston);

    const auto plain = select_candidates(profile_with(false, true, 0.1, 0.0), 3);
    CHECK(models_of(plain) == std::vector<ModelId>{ModelId::arima, ModelId::moving_average, ModelId::linear_regression});

    for (std::size_t n = 1; n <= registered_models().size(); ++n) {
        const auto pool = select_candidates(profile_with(true, true, 0.7, 0.5), n);
        CHECK(pool.size() == n);
        CHECK_NOTHROW(pool.validate());
        for (const auto& c : pool.candidates) CHECK_FALSE(c.rationale.empty());
    }
    CHECK_THROWS(select_candidates(profile_with(true, true, 0.7, 0.5), registered_models().size() + 1));
    // Seasonal profiles open the seasonal branch of the smoothing space.
    for (const auto& c : seasonal.candidates)
        if (c.model == ModelId::exp_smoothing) CHECK(c.space.size() == 12);
}

TEST_CASE("configuration sampling") {
    const auto rw = hyperparameter_space(ModelId::random_walk);
    CHECK(sample_configs(rw, 10, 1) == std::vector<Hyperparameters>{rw.config_at(0), rw.config_at(1)});

    const auto arima = hyperparameter_space(ModelId::arima);
    const auto a = sample_config_indices(arima, 10, 42);
    CHECK(a.size() == 10);
    CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 10);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(sample_config_indices(arima, 10, 42) == a);
    CHECK(sample_config_indices(arima, 10, 43) != a);

    const auto ma = hyperparameter_space(ModelId::moving_average);
    CHECK(sample_configs(ma, 4, 9).size() == 4);
    const auto one = sample_configs(hyperparameter_space(ModelId::arima, std::nullopt), 1, 5);
    CHECK(one.size() == 1);
    CHECK(sample_configs(HyperparameterSpace{{{"drift", {false}}}}, 1, 5).front() == Hyperparameters{{"drift", false}});
    CHECK_THROWS(sample_configs(arima, 0, 1));
}

TEST_CASE("backtest keeps the configuration with the lowest validation MAPE") {
    const auto x = seasonal_series(400, 21, 1.5, 0.01);
    const std::vector<double> train(x.begin(), x.begin() + 300), val(x.begin() + 300, x.end());
    const auto pool = select_candidates(build_profile(std::vector<double>(x.begin(), x.begin() + 400)), 5);
    const auto records = backtest(pool, train, val, {});
    REQUIRE(records.size() == pool.size());
    for (const auto& r : records) {
        if (r.status != BacktestStatus::ok) continue;
        CHECK(r.val_forecast.size() == val.size());
        for (const auto& t : r.trials) {
            if (!t.ok) continue;
            CHECK(r.val_mape <= t.val_mape);
            // Re-score the kept configuration independently.
        }
        const auto f = fit_forecast(r.spec, train, val.size());
        const auto m = score(val, f);
        CHECK(m.mape == r.val_mape);
        CHECK(m.mae == r.val_mae);
        CHECK(f == r.val_forecast);
    }
}

TEST_CASE("failed models are recorded and excluded") {
    // Every configuration of a 24-lag regression needs 26 points; 12 are given.
    CandidatePool pool;
    pool.candidates.push_back({ModelId::linear_regression, "needs more data", HyperparameterSpace{{{"num_lags", {24L}}}}});
    pool.candidates.push_back({ModelId::random_walk, "baseline", hyperparameter_space(ModelId::random_walk)});
    const std::vector<double> train(12, 5.0), val{5, 5, 5};
    const auto records = backtest(pool, train, val, {});
    CHECK(records[0].status == BacktestStatus::failed);
    CHECK_FALSE(records[0].trials.front().error.empty());
    CHECK(records[1].status == BacktestStatus::ok);
    const auto ranked = rank_top_k(records, 3);
    REQUIRE(ranked.top_k.size() == 1);
    CHECK(ranked.top_k.front().spec.id == ModelId::random_walk);
    CHECK_THROWS(rank_top_k({records[0]}, 3));
}

TEST_CASE("backtest is identical for any worker count") {
    const auto x = seasonal_series(500, 5, 2.0, 0.02);
    const std::vector<double> train(x.begin(), x.begin() + 400), val(x.begin() + 400, x.end());
    const auto pool = select_candidates(build_profile(x), 7);
    BacktestOptions o;
    o.seed = 7;
    o.scaler = AffineScaler::fit(train);
    const auto base = backtest(pool, train, val, o);
    for (std::size_t w : {2u, 4u, 8u}) {
        o.workers = w;
        const auto other = backtest(pool, train, val, o);
        REQUIRE(other.size() == base.size());
        for (std::size_t i = 0; i < base.size(); ++i) CHECK(to_json(other[i]).dump() == to_json(base[i]).dump());
    }
}

TEST_CASE("scaled backtests report metrics in original units") {
    const auto x = seasonal_series(300, 8, 1.0);
    const std::vector<double> train(x.begin(), x.begin() + 240), val(x.begin() + 240, x.end());
    CandidatePool pool;
    pool.candidates.push_back({ModelId::random_walk, "baseline", HyperparameterSpace{{{"drift", {false}}}}});
    BacktestOptions o;
    o.scaler = AffineScaler::fit(train);
    const auto r = backtest(pool, train, val, o).front();
    CHECK(r.val_mae == doctest::Approx(mae(val, std::vector<double>(val.size(), train.back()))).epsilon(1e-12));
}

TEST_CASE("ranking examples") {
    const std::vector<BacktestRecord> recs{record(ModelId::arima, 10, 1), record(ModelId::theta, 8, 1),
                                           record(ModelId::croston, 12, 1)};
    const auto top2 = rank_top_k(recs, 2);
    REQUIRE(top2.top_k.size() == 2);
    CHECK(top2.top_k[0].spec.id == ModelId::theta);
    CHECK(top2.top_k[1].spec.id == ModelId::arima);
    CHECK(rank_top_k(recs, 10).top_k.size() == 3);

    const auto tie = rank_top_k({record(ModelId::arima, 5, 2), record(ModelId::theta, 5, 1)}, 2);
    CHECK(tie.top_k[0].spec.id == ModelId::theta);
    const auto id_tie = rank_top_k({record(ModelId::theta, 5, 1), record(ModelId::arima, 5, 1)}, 2);
    CHECK(id_tie.top_k[0].spec.id == ModelId::arima);
}

TEST_CASE("ranking output is a sorted subsequence of the ok records") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<BacktestRecord> recs;
        for (ModelId id : registered_models()) {
            auto r = record(id, static_cast<double>(rng() % 20), static_cast<double>(rng() % 5));
            if (rng() % 4 == 0) r.status = BacktestStatus::failed;
            recs.push_back(r);
        }
        if (std::none_of(recs.begin(), recs.end(), [](const auto& r) { return r.status == BacktestStatus::ok; })) continue;
        const auto top = rank_top_k(recs, 3).top_k;
        for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].val_mape <= top[i].val_mape);
        for (const auto& r : top) CHECK(r.status == BacktestStatus::ok);
    }
}

TEST_CASE("selection record and backtest record json round trip") {
    const auto pool = select_candidates(profile_with(true, false, 0.6, 0.0), 5);
    const auto j = selection_record(pool);
    CHECK(j.at("selected_models").size() == 5);
    const auto back = pool_from_selection(j);
    REQUIRE(back.size() == pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        CHECK(back.candidates[i].model == pool.candidates[i].model);
        CHECK(back.candidates[i].space.size() == pool.candidates[i].space.size());
        CHECK(back.candidates[i].rationale == pool.candidates[i].rationale);
    }
    auto bad = j;
    bad["selected_models"][0]["hyperparameters"] = {{"nonsense", {1}}};
    CHECK_THROWS(pool_from_selection(bad));

    const auto x = seasonal_series(200, 3);
    const std::vector<double> train(x.begin(), x.begin() + 150), val(x.begin() + 150, x.end());
    for (const auto& r : backtest(pool, train, val, {})) {
        const auto rt = backtest_record_from_json(to_json(r));
        CHECK(to_json(rt).dump() == to_json(r).dump());
        CHECK(rt.val_forecast == r.val_forecast);
    }
}
