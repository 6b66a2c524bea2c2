#include "tsci/profile.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsci {

RollingStats rolling_stats(std::span<const double> values, std::size_t window) {
    if (window < 2) throw std::invalid_argument("rolling window must be >= 2");
    if (window > values.size()) throw std::invalid_argument("rolling window exceeds series length");
    RollingStats out;
    out.first_index = window - 1;
    for (std::size_t end = window - 1; end < values.size(); ++end) {
        const auto w = values.subspan(end + 1 - window, window);
        const double m = stats::mean(w);
        double ss = 0.0;
        for (double v : w) ss += (v - m) * (v - m);
        out.means.push_back(m);
        out.stds.push_back(std::sqrt(ss / static_cast<double>(window)));
    }
    return out;
}

Decomposition decompose(std::span<const double> values, std::size_t period) {
    if (period < 2) throw std::invalid_argument("decomposition period must be >= 2");
    const std::size_t n = values.size();
    if (n < 2 * period) throw std::invalid_argument("series shorter than two periods");

    Decomposition d;
    d.period = period;
    d.observed.assign(values.begin(), values.end());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    d.trend.assign(n, nan);
    d.residual.assign(n, nan);

    const bool even = period % 2 == 0;
    const std::size_t half = even ? period / 2 : (period - 1) / 2;
    d.margin = half;
    for (std::size_t t = half; t + half < n; ++t) {
        double sum = 0.0;
        if (even) {
            sum = 0.5 * values[t - half] + 0.5 * values[t + half];
            for (std::size_t i = t - half + 1; i < t + half; ++i) sum += values[i];
        } else {
            for (std::size_t i = t - half; i <= t + half; ++i) sum += values[i];
        }
        d.trend[t] = sum / static_cast<double>(period);
    }

    std::vector<double> phase_sum(period, 0.0);
    std::vector<std::size_t> phase_count(period, 0);
    for (std::size_t t = half; t + half < n; ++t) {
        phase_sum[t % period] += values[t] - d.trend[t];
        ++phase_count[t % period];
    }
    std::vector<double> phase_mean(period);
    for (std::size_t j = 0; j < period; ++j) phase_mean[j] = phase_sum[j] / static_cast<double>(phase_count[j]);
    const double offset = stats::mean(phase_mean);
    for (double& m : phase_mean) m -= offset;

    d.seasonal.resize(n);
    for (std::size_t t = 0; t < n; ++t) d.seasonal[t] = phase_mean[t % period];
    for (std::size_t t = half; t + half < n; ++t) d.residual[t] = values[t] - d.trend[t] - d.seasonal[t];
    return d;
}

Correlogram acf_pacf(std::span<const double> values, std::size_t max_lag) {
    const std::size_t n = values.size();
    if (n <= max_lag) throw std::invalid_argument("series must be longer than max_lag");
    const double m = stats::mean(values);
    double denom = 0.0;
    for (double v : values) denom += (v - m) * (v - m);
    if (!(denom > 0.0)) throw std::domain_error("degenerate series: zero variance");

    Correlogram c;
    c.acf.resize(max_lag + 1);
    c.acf[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) num += (values[t] - m) * (values[t + k] - m);
        c.acf[k] = num / denom;
    }

    // Durbin-Levinson: phi[k][k] is the partial autocorrelation at lag k.
    c.pacf.assign(max_lag + 1, 0.0);
    c.pacf[0] = 1.0;
    std::vector<double> phi(max_lag + 1, 0.0), prev(max_lag + 1, 0.0);
    double v = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = c.acf[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j] * c.acf[k - j];
        const double pkk = v > 0.0 ? num / v : 0.0;
        phi[k] = pkk;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - pkk * prev[k - j];
        v *= (1.0 - pkk * pkk);
        c.pacf[k] = std::clamp(pkk, -1.0, 1.0);
        prev = phi;
    }
    c.confidence_band = 1.96 / std::sqrt(static_cast<double>(n));
    return c;
}

StationarityResult stationarity_test(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 32) throw std::invalid_argument("stationarity test needs at least 32 observations");
    if (!(stats::variance(values) > 0.0)) throw std::domain_error("degenerate series: zero-variance regression");

    const auto max_lags = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n - 1))));
    std::vector<double> dy(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) dy[i] = values[i + 1] - values[i];

    // Exactly patterned differences (a noiseless line, a pure alternation) make
    // the lagged differences collinear with the constant; such lags carry no
    // information, so the lag order is reduced until the design has full rank.
    for (std::size_t lags = max_lags + 1; lags-- > 0;) {
        const std::size_t rows = dy.size() - lags;
        const std::size_t cols = 2 + lags;
        Eigen::MatrixXd x(rows, cols);
        Eigen::VectorXd y(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t i = r + lags;
            y(r) = dy[i];
            x(r, 0) = 1.0;
            x(r, 1) = values[i];
            for (std::size_t j = 1; j <= lags; ++j) x(r, 1 + j) = dy[i - j];
        }
        const auto qr = x.colPivHouseholderQr();
        if (qr.rank() < static_cast<Eigen::Index>(cols)) continue;
        const Eigen::VectorXd beta = qr.solve(y);
        const Eigen::VectorXd resid = y - x * beta;
        const double rss = resid.squaredNorm();

        StationarityResult r;
        r.critical_value = kAdfCritical5pct;
        r.lags = lags;
        const double scale = y.cwiseAbs().maxCoeff();
        if (!(rss > 1e-24 * scale * scale * static_cast<double>(rows))) {
            // Exact fit: the sign of the level coefficient alone decides; a zero
            // coefficient (deterministic drift) is no evidence against a unit root.
            const double gamma = std::abs(beta(1)) <= 1e-9 ? 0.0 : beta(1);
            r.statistic = gamma < 0.0 ? std::numeric_limits<double>::lowest()
                                      : (gamma > 0.0 ? std::numeric_limits<double>::max() : 0.0);
        } else {
            const double sigma2 = rss / static_cast<double>(rows - cols);
            const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
            r.statistic = beta(1) / std::sqrt(sigma2 * xtx_inv(1, 1));
        }
        r.is_stationary = r.statistic < r.critical_value;
        return r;
    }
    throw std::domain_error("degenerate series: singular stationarity regression");
}

std::size_t default_max_lag(std::size_t n) noexcept { return std::min(kDefaultMaxLag, n / 2); }

std::size_t dominant_acf_period(const Correlogram& c) {
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 2; k + 1 < c.acf.size(); ++k) {
        const double a = c.acf[k];
        if (!(a > c.confidence_band)) continue;
        if (!(a > c.acf[k - 1] && a >= c.acf[k + 1])) continue;
        if (a > best_value) {
            best_value = a;
            best = k;
        }
    }
    return best;
}

namespace {

double one_minus_variance_ratio(const Decomposition& d, bool seasonal) {
    std::vector<double> resid, signal;
    for (std::size_t t = 0; t < d.observed.size(); ++t) {
        if (!d.defined(t)) continue;
        resid.push_back(d.residual[t]);
        signal.push_back((seasonal ? d.seasonal[t] : d.trend[t]) + d.residual[t]);
    }
    if (resid.size() < 2) return 0.0;
    const double vs = stats::variance(signal);
    if (!(vs > 0.0)) return 0.0;
    return std::clamp(1.0 - stats::variance(resid) / vs, 0.0, 1.0);
}

}  // namespace

double seasonal_strength(const Decomposition& d) { return one_minus_variance_ratio(d, true); }
double trend_strength(const Decomposition& d) { return one_minus_variance_ratio(d, false); }

TemporalProfile build_profile(std::span<const double> values) {
    const std::size_t n = values.size();
    const auto correlogram = acf_pacf(values, default_max_lag(n));

    TemporalProfile p;
    std::optional<Decomposition> decomposition;
    const std::size_t candidate = dominant_acf_period(correlogram);
    if (candidate >= 2 && n >= 2 * candidate) {
        auto d = decompose(values, candidate);
        if (seasonal_strength(d) >= kMinSeasonalStrength) {
            p.seasonality.detected = true;
            p.seasonality.period = candidate;
            decomposition = std::move(d);
        }
    }
    if (!decomposition) decomposition = decompose(values, std::max<std::size_t>(2, std::min(kFallbackTrendWindow, n / 2)));

    p.decomposition_period = decomposition->period;
    p.seasonality.strength = seasonal_strength(*decomposition);
    p.trend.strength = trend_strength(*decomposition);
    p.trend.label = classify_trend(values);
    p.stationarity = stationarity_test(values);
    p.intermittency = static_cast<double>(std::count(values.begin(), values.end(), 0.0)) / static_cast<double>(n);
    p.distribution.skewness = stats::skewness(values);
    p.distribution.excess_kurtosis = stats::excess_kurtosis(values);
    return p;
}

namespace {

nlohmann::json nullable(const std::vector<double>& v) {
    auto j = nlohmann::json::array();
    for (double x : v) j.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return j;
}

}  // namespace

void to_json(nlohmann::json& j, const TemporalProfile& p) {
    j = {{"trend", {{"label", to_string(p.trend.label)}, {"strength", p.trend.strength}}},
         {"seasonality",
          {{"detected", p.seasonality.detected},
           {"period", p.seasonality.period},
           {"strength", p.seasonality.strength}}},
         {"stationarity",
          {{"is_stationary", p.stationarity.is_stationary},
           {"test_statistic", p.stationarity.statistic},
           {"critical_value", p.stationarity.critical_value},
           {"lags", p.stationarity.lags}}},
         {"intermittency", p.intermittency},
         {"distribution",
          {{"skewness", p.distribution.skewness}, {"excess_kurtosis", p.distribution.excess_kurtosis}}},
         {"decomposition_period", p.decomposition_period}};
}

void to_json(nlohmann::json& j, const Decomposition& d) {
    j = {{"period", d.period},
         {"margin", d.margin},
         {"observed", d.observed},
         {"trend", nullable(d.trend)},
         {"seasonal", d.seasonal},
         {"residual", nullable(d.residual)}};
}

void to_json(nlohmann::json& j, const Correlogram& c) {
    j = {{"acf", c.acf}, {"pacf", c.pacf}, {"confidence_band", c.confidence_band}};
}

}  // namespace tsci
