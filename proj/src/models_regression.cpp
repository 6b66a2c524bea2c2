#include "models_detail.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace tsci::detail {

namespace {

constexpr double kLassoTolerance = 1e-8;
constexpr int kLassoMaxSweeps = 10000;

// Lag features for predicting x[t]: x[t-1..t-L], then powers 2..degree of each lag.
std::vector<double> features(std::span<const double> history, std::size_t t, const LagRegression& cfg) {
    std::vector<double> f;
    f.reserve(cfg.num_lags * cfg.degree);
    for (std::size_t j = 1; j <= cfg.num_lags; ++j) f.push_back(history[t - j]);
    for (std::size_t power = 2; power <= cfg.degree; ++power)
        for (std::size_t j = 1; j <= cfg.num_lags; ++j) f.push_back(std::pow(history[t - j], static_cast<double>(power)));
    return f;
}

// Intercept followed by one coefficient per feature column.
std::vector<double> fit_ols(const std::vector<std::vector<double>>& rows, std::span<const double> y) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd a(m, p + 1);
    Eigen::VectorXd b(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        a(r, 0) = 1.0;
        for (Eigen::Index c = 0; c < p; ++c) a(r, c + 1) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        b(r) = y[static_cast<std::size_t>(r)];
    }
    const Eigen::VectorXd coef = a.completeOrthogonalDecomposition().solve(b);
    return {coef.data(), coef.data() + coef.size()};
}

std::vector<double> fit_ridge(const std::vector<std::vector<double>>& rows, std::span<const double> y, double lambda) {
    const std::size_t m = rows.size();
    const std::size_t p = rows.front().size();
    std::vector<double> col_mean(p, 0.0);
    for (const auto& r : rows)
        for (std::size_t c = 0; c < p; ++c) col_mean[c] += r[c];
    for (double& v : col_mean) v /= static_cast<double>(m);
    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= static_cast<double>(m);

    Eigen::MatrixXd xc(m, p);
    Eigen::VectorXd yc(m);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < p; ++c) xc(r, c) = rows[r][c] - col_mean[c];
        yc(r) = y[r] - y_mean;
    }
    Eigen::MatrixXd gram = xc.transpose() * xc;
    gram.diagonal().array() += lambda;
    const Eigen::VectorXd beta = gram.completeOrthogonalDecomposition().solve(xc.transpose() * yc);

    std::vector<double> out(p + 1);
    double intercept = y_mean;
    for (std::size_t c = 0; c < p; ++c) {
        out[c + 1] = beta(static_cast<Eigen::Index>(c));
        intercept -= beta(static_cast<Eigen::Index>(c)) * col_mean[c];
    }
    out[0] = intercept;
    return out;
}

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

}  // namespace

std::vector<double> lasso_fit(const std::vector<std::vector<double>>& rows, std::span<const double> y, double lambda) {
    const std::size_t m = rows.size();
    const std::size_t p = rows.front().size();
    std::vector<double> mean(p, 0.0), scale(p, 0.0);
    for (const auto& r : rows)
        for (std::size_t c = 0; c < p; ++c) mean[c] += r[c];
    for (double& v : mean) v /= static_cast<double>(m);
    for (const auto& r : rows)
        for (std::size_t c = 0; c < p; ++c) scale[c] += (r[c] - mean[c]) * (r[c] - mean[c]);
    for (double& v : scale) v = std::sqrt(v / static_cast<double>(m));
    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= static_cast<double>(m);

    // Column-major standardized design; constant columns stay at zero weight.
    std::vector<std::vector<double>> z(p, std::vector<double>(m, 0.0));
    for (std::size_t c = 0; c < p; ++c)
        if (scale[c] > 0.0)
            for (std::size_t r = 0; r < m; ++r) z[c][r] = (rows[r][c] - mean[c]) / scale[c];

    std::vector<double> resid(m);
    for (std::size_t r = 0; r < m; ++r) resid[r] = y[r] - y_mean;
    std::vector<double> beta(p, 0.0);
    const auto mm = static_cast<double>(m);
    for (int sweep = 0; sweep < kLassoMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
            if (!(scale[c] > 0.0)) continue;
            // Standardized columns have unit mean square, so the update denominator is 1.
            double rho = 0.0;
            for (std::size_t r = 0; r < m; ++r) rho += z[c][r] * (resid[r] + z[c][r] * beta[c]);
            rho /= mm;
            const double updated = soft_threshold(rho, lambda);
            const double delta = updated - beta[c];
            if (delta != 0.0) {
                for (std::size_t r = 0; r < m; ++r) resid[r] -= delta * z[c][r];
                beta[c] = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        if (max_change < kLassoTolerance) break;
    }

    std::vector<double> out(p + 1);
    double intercept = y_mean;
    for (std::size_t c = 0; c < p; ++c) {
        const double coef = scale[c] > 0.0 ? beta[c] / scale[c] : 0.0;
        out[c + 1] = coef;
        intercept -= coef * mean[c];
    }
    out[0] = intercept;
    return out;
}

std::vector<double> forecast_lag_regression(std::span<const double> x, const LagRegression& cfg, std::size_t h) {
    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    for (std::size_t t = cfg.num_lags; t < x.size(); ++t) {
        rows.push_back(features(x, t, cfg));
        targets.push_back(x[t]);
    }
    if (rows.empty()) throw ModelFailure("no training rows for lag regression");

    std::vector<double> coef;
    switch (cfg.penalty) {
        case Penalty::none: coef = fit_ols(rows, targets); break;
        case Penalty::ridge: coef = fit_ridge(rows, targets, cfg.lambda); break;
        case Penalty::lasso: coef = lasso_fit(rows, targets, cfg.lambda); break;
    }

    // Recursive multi-step: each prediction becomes the newest lag.
    std::vector<double> history(x.begin(), x.end());
    std::vector<double> out;
    out.reserve(h);
    for (std::size_t i = 0; i < h; ++i) {
        const auto f = features(history, history.size(), cfg);
        double y = coef[0];
        for (std::size_t c = 0; c < f.size(); ++c) y += coef[c + 1] * f[c];
        if (!std::isfinite(y)) throw ModelFailure("lag regression diverged during recursive forecasting");
        out.push_back(y);
        history.push_back(y);
    }
    return out;
}

}  // namespace tsci::detail
