#pragma once

#include "tsci/series.hpp"
#include "tsci/stats.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace tsci {

struct RollingStats {
    /// Index of the first window end; means[i] belongs to series index first_index + i.
    std::size_t first_index = 0;
    std::vector<double> means;
    std::vector<double> stds;  // population
};

/// Trailing windows ending at each index from window - 1 onward.
RollingStats rolling_stats(std::span<const double> values, std::size_t window);

/// Additive classical decomposition X = T + S + R. Trend and residual are only
/// defined on [margin, size - margin); outside that range they hold NaN.
struct Decomposition {
    std::size_t period = 0;
    std::size_t margin = 0;
    std::vector<double> observed;
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;

    bool defined(std::size_t i) const noexcept { return i >= margin && i + margin < observed.size(); }
};

/// Centered moving-average trend (2 x period for even periods), per-phase means
/// of the detrended series re-centered to zero, and the remainder.
Decomposition decompose(std::span<const double> values, std::size_t period);

struct Correlogram {
    std::vector<double> acf;   // lags 0..max_lag
    std::vector<double> pacf;  // lags 0..max_lag, pacf[0] = 1
    double confidence_band = 0.0;
};

/// Biased ACF estimator, PACF via Durbin-Levinson, band 1.96 / sqrt(n).
Correlogram acf_pacf(std::span<const double> values, std::size_t max_lag);

struct StationarityResult {
    bool is_stationary = false;
    double statistic = 0.0;
    double critical_value = -2.86;
    std::size_t lags = 0;
};

inline constexpr double kAdfCritical5pct = -2.86;

/// Augmented Dickey-Fuller regression with constant and floor((n-1)^(1/3))
/// lagged differences, compared against the 5% large-sample critical value.
StationarityResult stationarity_test(std::span<const double> values);

struct TrendProfile {
    TrendDirection label = TrendDirection::stable;
    double strength = 0.0;
};

struct SeasonalityProfile {
    bool detected = false;
    std::size_t period = 0;
    double strength = 0.0;
};

struct DistributionProfile {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

struct TemporalProfile {
    TrendProfile trend;
    SeasonalityProfile seasonality;
    StationarityResult stationarity;
    double intermittency = 0.0;
    DistributionProfile distribution;
    /// Period used for the decomposition behind the strength measures.
    std::size_t decomposition_period = 0;
};

inline constexpr std::size_t kDefaultMaxLag = 40;
inline constexpr std::size_t kFallbackTrendWindow = 24;
/// A significant ACF peak only counts as seasonality when the decomposition at
/// that period explains at least this share of the detrended variance.
inline constexpr double kMinSeasonalStrength = 0.3;

/// min(40, n / 2).
std::size_t default_max_lag(std::size_t n) noexcept;

/// Highest significant local ACF maximum over lags 2..max_lag-1; ties go to the
/// smaller lag. Returns 0 when there is none.
std::size_t dominant_acf_period(const Correlogram& correlogram);

/// 1 - Var(R) / Var(S + R) and 1 - Var(R) / Var(T + R) over the defined range, clamped.
double seasonal_strength(const Decomposition& d);
double trend_strength(const Decomposition& d);

TemporalProfile build_profile(std::span<const double> values);

void to_json(nlohmann::json& j, const TemporalProfile& p);
void to_json(nlohmann::json& j, const Decomposition& d);
void to_json(nlohmann::json& j, const Correlogram& c);

}  // namespace tsci
