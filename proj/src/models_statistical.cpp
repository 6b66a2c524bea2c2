#include "models_detail.hpp"

#include "tsci/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <limits>

namespace tsci::detail {

std::vector<double> forecast_random_walk(std::span<const double> x, bool drift, std::size_t h) {
    const double last = x.back();
    const double step = drift && x.size() > 1 ? (x.back() - x.front()) / static_cast<double>(x.size() - 1) : 0.0;
    std::vector<double> out(h);
    for (std::size_t i = 0; i < h; ++i) out[i] = drift ? last + static_cast<double>(i + 1) * step : last;
    return out;
}

std::vector<double> forecast_moving_average(std::span<const double> x, std::size_t window, std::size_t h) {
    std::vector<double> buffer(x.end() - static_cast<std::ptrdiff_t>(window), x.end());
    std::vector<double> out;
    out.reserve(h);
    for (std::size_t i = 0; i < h; ++i) {
        const double next = stats::mean(std::span<const double>(buffer).last(window));
        out.push_back(next);
        buffer.push_back(next);
    }
    return out;
}

// --- exponential smoothing -------------------------------------------------

namespace {

struct SmoothingState {
    double level = 0.0;
    double slope = 0.0;
    std::vector<double> season;  // indexed by t mod period
    double sse = 0.0;
    std::size_t end = 0;  // number of observations consumed
};

SmoothingState run_smoothing(std::span<const double> x, double alpha, double beta, double gamma, bool trend,
                             std::size_t period) {
    SmoothingState s;
    std::size_t start = 0;
    if (period >= 2) {
        const double first = stats::mean(x.first(period));
        s.level = first;
        s.slope = trend ? (stats::mean(x.subspan(period, period)) - first) / static_cast<double>(period) : 0.0;
        s.season.resize(period);
        for (std::size_t j = 0; j < period; ++j) s.season[j] = x[j] - first;
        start = period;
    } else {
        s.level = x[0];
        s.slope = trend ? x[1] - x[0] : 0.0;
        start = 1;
    }
    for (std::size_t t = start; t < x.size(); ++t) {
        const double seasonal = period >= 2 ? s.season[t % period] : 0.0;
        const double predicted = s.level + s.slope + seasonal;
        const double err = x[t] - predicted;
        s.sse += err * err;
        const double prev_level = s.level;
        s.level = alpha * (x[t] - seasonal) + (1.0 - alpha) * (s.level + s.slope);
        if (trend) s.slope = beta * (s.level - prev_level) + (1.0 - beta) * s.slope;
        if (period >= 2) s.season[t % period] = gamma * (x[t] - s.level) + (1.0 - gamma) * seasonal;
    }
    s.end = x.size();
    return s;
}

// Coarse grid over the free smoothing weights followed by a finer local grid
// around the coarse minimum. Ties keep the earlier grid point.
std::array<double, 3> fit_smoothing_weights(std::span<const double> x, const SmoothingParams& p) {
    std::array<std::optional<double>, 3> fixed{p.alpha, p.trend ? p.beta : std::optional<double>(0.0),
                                               p.period >= 2 ? p.gamma : std::optional<double>(0.0)};
    std::vector<double> coarse{0.01};
    for (int i = 1; i <= 19; ++i) coarse.push_back(0.05 * i);

    const auto search = [&](const std::array<std::vector<double>, 3>& grids) {
        std::array<double, 3> best{};
        double best_sse = std::numeric_limits<double>::infinity();
        for (double a : grids[0])
            for (double b : grids[1])
                for (double g : grids[2]) {
                    const double sse = run_smoothing(x, a, b, g, p.trend, p.period).sse;
                    if (sse < best_sse) {
                        best_sse = sse;
                        best = {a, b, g};
                    }
                }
        return best;
    };

    std::array<std::vector<double>, 3> grids;
    for (std::size_t k = 0; k < 3; ++k) grids[k] = fixed[k] ? std::vector<double>{*fixed[k]} : coarse;
    const auto rough = search(grids);
    for (std::size_t k = 0; k < 3; ++k) {
        if (fixed[k]) continue;
        grids[k].clear();
        for (int i = -4; i <= 4; ++i) {
            const double v = rough[k] + 0.01 * i;
            if (v >= 0.001 && v <= 1.0) grids[k].push_back(v);
        }
    }
    return search(grids);
}

}  // namespace

std::vector<double> forecast_exp_smoothing(std::span<const double> x, const SmoothingParams& params, std::size_t h) {
    const bool free_weights = !params.alpha || (params.trend && !params.beta) || (params.period >= 2 && !params.gamma);
    std::array<double, 3> w{params.alpha.value_or(0.0), params.beta.value_or(0.0), params.gamma.value_or(0.0)};
    if (free_weights) w = fit_smoothing_weights(x, params);

    const auto s = run_smoothing(x, w[0], w[1], w[2], params.trend, params.period);
    std::vector<double> out(h);
    for (std::size_t i = 0; i < h; ++i) {
        const double seasonal = params.period >= 2 ? s.season[(s.end + i) % params.period] : 0.0;
        out[i] = s.level + static_cast<double>(i + 1) * s.slope + seasonal;
    }
    return out;
}

// --- ARIMA (Hannan-Rissanen) -----------------------------------------------

namespace {

Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.cols() == 0) return Eigen::VectorXd();
    if (x.rows() < x.cols()) throw ModelFailure("least-squares system has fewer rows than columns");
    return x.completeOrthogonalDecomposition().solve(y);
}

}  // namespace

std::vector<double> forecast_arima(std::span<const double> x, std::size_t p, std::size_t d, std::size_t q,
                                   std::size_t h) {
    // Differencing levels: level[k] is x differenced k times.
    std::vector<std::vector<double>> level{std::vector<double>(x.begin(), x.end())};
    for (std::size_t k = 0; k < d; ++k) {
        const auto& prev = level.back();
        std::vector<double> next(prev.size() - 1);
        for (std::size_t i = 0; i + 1 < prev.size(); ++i) next[i] = prev[i + 1] - prev[i];
        level.push_back(std::move(next));
    }
    const std::vector<double>& w = level.back();
    const std::size_t n = w.size();
    const bool intercept = d == 0;

    // Stage 1: long autoregression supplies innovation estimates for the MA terms.
    std::vector<double> innovations(n, 0.0);
    std::size_t long_order = 0;
    if (q > 0) {
        const auto by_log = static_cast<std::size_t>(std::floor(10.0 * std::log10(static_cast<double>(n))));
        long_order = std::min((n - 1) / 3, std::max(p + q + 1, by_log));
        if (long_order == 0) throw ModelFailure("series too short for the long autoregression");
        const std::size_t rows = n - long_order;
        const std::size_t cols = long_order + (intercept ? 1 : 0);
        Eigen::MatrixXd a(rows, cols);
        Eigen::VectorXd b(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t t = r + long_order;
            std::size_t c = 0;
            if (intercept) a(r, c++) = 1.0;
            for (std::size_t j = 1; j <= long_order; ++j) a(r, c++) = w[t - j];
            b(r) = w[t];
        }
        const Eigen::VectorXd coef = least_squares(a, b);
        const Eigen::VectorXd resid = b - a * coef;
        for (std::size_t r = 0; r < rows; ++r) innovations[r + long_order] = resid(r);
    }

    // Stage 2: regress on own lags and lagged innovations.
    const std::size_t start = std::max(p, long_order + q);
    const std::size_t cols = p + q + (intercept ? 1 : 0);
    double c0 = 0.0;
    std::vector<double> phi(p, 0.0), theta(q, 0.0);
    if (cols > 0) {
        if (n <= start) throw ModelFailure("series too short for ARIMA estimation");
        const std::size_t rows = n - start;
        Eigen::MatrixXd a(rows, cols);
        Eigen::VectorXd b(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t t = r + start;
            std::size_t c = 0;
            if (intercept) a(r, c++) = 1.0;
            for (std::size_t j = 1; j <= p; ++j) a(r, c++) = w[t - j];
            for (std::size_t j = 1; j <= q; ++j) a(r, c++) = innovations[t - j];
            b(r) = w[t];
        }
        const Eigen::VectorXd coef = least_squares(a, b);
        std::size_t c = 0;
        if (intercept) c0 = coef(c++);
        for (std::size_t j = 0; j < p; ++j) phi[j] = coef(c++);
        for (std::size_t j = 0; j < q; ++j) theta[j] = coef(c++);
    }

    // In-sample innovations under the fitted model, then the recursive forecast.
    std::vector<double> path = w;
    std::vector<double> eps(n, 0.0);
    const auto predict_at = [&](std::size_t t) {
        double v = c0;
        for (std::size_t j = 1; j <= p && j <= t; ++j) v += phi[j - 1] * path[t - j];
        for (std::size_t j = 1; j <= q && j <= t; ++j) v += theta[j - 1] * eps[t - j];
        return v;
    };
    if (q > 0) {
        for (std::size_t t = p; t < n; ++t) {
            eps[t] = w[t] - predict_at(t);
            if (!std::isfinite(eps[t])) throw ModelFailure("ARIMA innovations diverged");
        }
    }
    for (std::size_t i = 0; i < h; ++i) {
        const std::size_t t = n + i;
        path.push_back(0.0);
        eps.push_back(0.0);
        path[t] = predict_at(t);
    }

    std::vector<double> forecast(path.begin() + static_cast<std::ptrdiff_t>(n), path.end());
    for (std::size_t k = d; k-- > 0;) {
        double anchor = level[k].back();
        for (double& v : forecast) {
            anchor += v;
            v = anchor;
        }
    }
    return forecast;
}

// --- Theta -----------------------------------------------------------------

std::vector<double> forecast_theta(std::span<const double> x, double ses_alpha, std::size_t h) {
    const auto line = stats::fit_line(x);
    double level = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double theta2 = 2.0 * x[t] - (line.intercept + line.slope * static_cast<double>(t));
        level = t == 0 ? theta2 : ses_alpha * theta2 + (1.0 - ses_alpha) * level;
    }
    const auto n = static_cast<double>(x.size());
    std::vector<double> out(h);
    for (std::size_t i = 0; i < h; ++i) {
        const double trend = line.intercept + line.slope * (n - 1.0 + static_cast<double>(i + 1));
        out[i] = 0.5 * trend + 0.5 * level;
    }
    return out;
}

// --- Croston ---------------------------------------------------------------

std::vector<double> forecast_croston(std::span<const double> x, double alpha, std::size_t h) {
    std::optional<double> size, interval;
    std::size_t last = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (x[t] == 0.0) continue;
        if (!size) {
            size = x[t];
            interval = static_cast<double>(t + 1);
        } else {
            *size += alpha * (x[t] - *size);
            *interval += alpha * (static_cast<double>(t - last) - *interval);
        }
        last = t;
    }
    const double rate = size ? *size / *interval : 0.0;
    return std::vector<double>(h, rate);
}

}  // namespace tsci::detail
