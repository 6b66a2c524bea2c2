#include "tsci/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsci::stats {

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty range");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

double median_sorted(std::span<const double> sorted) {
    if (sorted.empty()) throw std::invalid_argument("median of empty range");
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return median_sorted(values);
}

double mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of empty range");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return ss / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) { return std::sqrt(variance(values)); }

namespace {

double central_moment_ratio(std::span<const double> values, int order) {
    const double m = mean(values);
    double m2 = 0.0, mk = 0.0;
    for (double v : values) {
        const double d = v - m;
        m2 += d * d;
        mk += std::pow(d, order);
    }
    const auto n = static_cast<double>(values.size());
    m2 /= n;
    mk /= n;
    if (m2 <= 0.0) return 0.0;
    return mk / std::pow(m2, order / 2.0);
}

}  // namespace

double skewness(std::span<const double> values) { return central_moment_ratio(values, 3); }

double excess_kurtosis(std::span<const double> values) {
    const double ratio = central_moment_ratio(values, 4);
    return ratio == 0.0 ? 0.0 : ratio - 3.0;
}

LineFit fit_line(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("line fit of empty range");
    const auto n = static_cast<double>(values.size());
    const double tbar = (n - 1.0) / 2.0;
    const double ybar = mean(values);
    double sty = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double dt = static_cast<double>(i) - tbar;
        sty += dt * (values[i] - ybar);
        stt += dt * dt;
    }
    const double slope = stt > 0.0 ? sty / stt : 0.0;
    return LineFit{ybar - slope * tbar, slope};
}

}  // namespace tsci::stats

namespace tsci {

const char* to_string(TrendDirection d) noexcept {
    switch (d) {
        case TrendDirection::increasing: return "increasing";
        case TrendDirection::decreasing: return "decreasing";
        case TrendDirection::stable: return "stable";
    }
    return "stable";
}

TrendDirection classify_trend(std::span<const double> values) {
    if (values.size() < 2) return TrendDirection::stable;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range = *hi - *lo;
    if (range <= 0.0) return TrendDirection::stable;
    const double slope = stats::fit_line(values).slope;
    const double rise = std::abs(slope) * static_cast<double>(values.size()) / range;
    if (rise <= 0.1) return TrendDirection::stable;
    return slope > 0.0 ? TrendDirection::increasing : TrendDirection::decreasing;
}

}  // namespace tsci
