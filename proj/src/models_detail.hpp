#pragma once

#include "tsci/models.hpp"

#include <span>
#include <vector>

namespace tsci::detail {

std::vector<double> forecast_random_walk(std::span<const double> x, bool drift, std::size_t h);
std::vector<double> forecast_moving_average(std::span<const double> x, std::size_t window, std::size_t h);

struct SmoothingParams {
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> gamma;
    bool trend = false;
    std::size_t period = 0;  // 0 means non-seasonal
};
std::vector<double> forecast_exp_smoothing(std::span<const double> x, const SmoothingParams& params, std::size_t h);

std::vector<double> forecast_arima(std::span<const double> x, std::size_t p, std::size_t d, std::size_t q,
                                   std::size_t h);
std::vector<double> forecast_theta(std::span<const double> x, double ses_alpha, std::size_t h);
std::vector<double> forecast_croston(std::span<const double> x, double alpha, std::size_t h);

enum class Penalty { none, ridge, lasso };
struct LagRegression {
    std::size_t num_lags = 1;
    std::size_t degree = 1;
    Penalty penalty = Penalty::none;
    double lambda = 0.0;
};
std::vector<double> forecast_lag_regression(std::span<const double> x, const LagRegression& cfg, std::size_t h);

/// Lasso by cyclic coordinate descent on standardized columns; objective
/// (1 / 2m) ||y - b0 - X b||^2 + lambda ||b||_1. Returns intercept followed by
/// coefficients on the original column scale.
std::vector<double> lasso_fit(const std::vector<std::vector<double>>& rows, std::span<const double> y, double lambda);

}  // namespace tsci::detail
