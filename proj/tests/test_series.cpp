#include "tsci/series.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace tsci;

namespace {

// Independent oracles written straight from the metric definitions.
double oracle_mae(const std::vector<double>& a, const std::vector<double>& p) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(static_cast<long double>(a[i]) - p[i]);
    return static_cast<double>(s / a.size());
}

double oracle_mape(const std::vector<double>& a, const std::vector<double>& p) {
    long double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::fabs(a[i]) < 1e-8) continue;
        s += std::fabs((static_cast<long double>(a[i]) - p[i]) / a[i]);
        ++n;
    }
    return static_cast<double>(100.0L * s / n);
}

}  // namespace

TEST_CASE("series stores explicit missing slots") {
    Series s(std::vector<std::optional<double>>{1.0, std::nullopt, 3.0}, 10);
    CHECK(s.size() == 3);
    CHECK(s.start_index() == 10);
    CHECK(s.is_missing(1));
    CHECK(s.missing_count() == 1);
    CHECK(s.observed() == std::vector<double>{1.0, 3.0});
    CHECK_THROWS_AS(s.value(1), std::domain_error);
    CHECK_THROWS_AS(s.dense(), std::domain_error);
    const auto sub = s.slice(1, 2);
    CHECK(sub.start_index() == 11);
    CHECK(sub.size() == 2);
    CHECK_THROWS(s.slice(2, 5));
}

TEST_CASE("mae examples") {
    CHECK(mae(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(mae(std::vector<double>{100, 200}, std::vector<double>{110, 180}) == doctest::Approx(15.0));
    CHECK(mae(std::vector<double>{0, 0}, std::vector<double>{1, -1}) == doctest::Approx(1.0));
    CHECK_THROWS(mae(std::vector<double>{1, 2}, std::vector<double>{1}));
    CHECK_THROWS(mae(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("mape examples and zero guard") {
    CHECK(mape(std::vector<double>{100, 200}, std::vector<double>{110, 180}) == doctest::Approx(10.0));
    CHECK(mape(std::vector<double>{5}, std::vector<double>{5}) == 0.0);
    CHECK_THROWS_WITH_AS(mape(std::vector<double>{0, 0}, std::vector<double>{1, 1}),
                         doctest::Contains("MAPE undefined"),
                         std::domain_error);
    // A zero target is excluded, not inflated.
    CHECK(mape(std::vector<double>{0, 100}, std::vector<double>{5, 110}) == doctest::Approx(10.0));
    CHECK_THROWS(mape(std::vector<double>{1, 2}, std::vector<double>{1}));
}

TEST_CASE("metrics agree with oracles on random inputs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 40;
        std::vector<double> a(n), p(n);
        for (auto& v : a) v = u(rng);
        for (auto& v : p) v = u(rng);
        CHECK(mae(a, p) == doctest::Approx(oracle_mae(a, p)).epsilon(1e-12));
        CHECK(mape(a, p) == doctest::Approx(oracle_mape(a, p)).epsilon(1e-12));
    }
}

TEST_CASE("metric properties: non-negativity, identity, permutation equivariance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1, 100);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 30;
        std::vector<double> a(n), p(n);
        for (auto& v : a) v = u(rng);
        for (auto& v : p) v = u(rng);
        CHECK(mae(a, p) >= 0.0);
        CHECK(mae(a, a) == 0.0);
        CHECK(mae(a, p) > 0.0);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> ap(n), pp(n);
        for (std::size_t i = 0; i < n; ++i) {
            ap[i] = a[perm[i]];
            pp[i] = p[perm[i]];
        }
        CHECK(mae(ap, pp) == doctest::Approx(mae(a, p)).epsilon(1e-12));
        CHECK(mape(ap, pp) == doctest::Approx(mape(a, p)).epsilon(1e-12));
    }
}

TEST_CASE("split partitions the prefix in order") {
    std::vector<double> v(12);
    std::iota(v.begin(), v.end(), 0.0);
    const Series s(v);
    const auto parts = split(s, {6, 2, 4});
    CHECK(parts.train.size() == 6);
    CHECK(parts.val.size() == 2);
    CHECK(parts.test.size() == 4);
    std::vector<double> joined = parts.train.dense();
    for (double x : parts.val.dense()) joined.push_back(x);
    for (double x : parts.test.dense()) joined.push_back(x);
    CHECK(joined == v);

    CHECK_THROWS(split(Series(std::vector<double>(11, 1.0)), {6, 2, 4}));

    const auto big = split(Series(std::vector<double>(512 + 96, 1.0)), {384, 128, 96});
    CHECK(big.train.size() == 384);
    CHECK(big.val.size() == 128);
    CHECK(big.test.size() == 96);
}

TEST_CASE("split rejects missing values in train or validation but passes the test segment through") {
    std::vector<std::optional<double>> v(12, 1.0);
    v[10] = std::nullopt;
    CHECK_NOTHROW(split(Series(v), {6, 2, 4}));
    v[3] = std::nullopt;
    CHECK_THROWS(split(Series(v), {6, 2, 4}));
}

TEST_CASE("default split mirrors the horizon within a quarter of the window") {
    const auto a = default_split(512, 96);
    CHECK(a.val_len == 96);
    CHECK(a.train_len == 416);
    CHECK(a.test_horizon == 96);
    const auto b = default_split(512, 720);
    CHECK(b.val_len == 128);
    CHECK(b.train_len == 384);
    CHECK(b.input_length() == 512);
}

TEST_CASE("score_observed ignores missing targets") {
    Series actual(std::vector<std::optional<double>>{100.0, std::nullopt, 200.0});
    const auto m = score_observed(actual, std::vector<double>{110, 999, 180});
    CHECK(m.mae == doctest::Approx(15.0));
    CHECK(m.mape == doctest::Approx(10.0));
}
