#pragma once

#include <span>
#include <vector>

// Small descriptive-statistics toolkit shared by the preprocessing, profiling
// and ensemble code.
namespace tsci::stats {

/// Linear interpolation between order statistics (type 7). `sorted` must be
/// ascending and non-empty; q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);
double quantile(std::vector<double> values, double q);

/// Median of an ascending range.
double median_sorted(std::span<const double> sorted);
double median(std::vector<double> values);

double mean(std::span<const double> values);
/// Population variance.
double variance(std::span<const double> values);
double stddev(std::span<const double> values);
double skewness(std::span<const double> values);
double excess_kurtosis(std::span<const double> values);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};
/// Least-squares line through (i, values[i]), i = 0..n-1.
LineFit fit_line(std::span<const double> values);

}  // namespace tsci::stats

namespace tsci {

enum class TrendDirection { increasing, decreasing, stable };

const char* to_string(TrendDirection d) noexcept;

/// Sign of the least-squares slope, reported as a direction only when the
/// fitted rise over the window exceeds 10% of the value range.
TrendDirection classify_trend(std::span<const double> values);

}  // namespace tsci
