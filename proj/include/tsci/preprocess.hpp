#pragma once

#include "tsci/series.hpp"
#include "tsci/stats.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsci {

using IndexSet = std::vector<std::size_t>;  // ascending, unique

enum class DetectionMethod { rolling_iqr, rolling_zscore, percentile, none };
enum class OutlierHandling { clip, interpolate, ffill, bfill, local_mean, local_median, smooth, drop };
enum class MissingFill { interpolate, ffill, bfill, local_mean, local_median, zero, drop };

struct DetectionPolicy {
    DetectionMethod method = DetectionMethod::rolling_iqr;
    std::size_t window = 24;
    double alpha = 1.5;
    bool robust_center = false;
    double lower_pct = 1.0;
    double upper_pct = 99.0;

    void validate() const;
};

struct RepairPolicy {
    OutlierHandling outlier_handle = OutlierHandling::interpolate;
    MissingFill missing_fill = MissingFill::interpolate;
    std::size_t neighborhood = 24;
    std::size_t smooth_window = 3;
    /// Winsorization bounds; when unset, the range of the non-flagged values.
    std::optional<std::pair<double, double>> clip_bounds;

    void validate() const;
};

struct PreprocessPolicy {
    DetectionPolicy detection;
    RepairPolicy repair;
};

/// Rolling IQR + interpolation for both outliers and missing values.
PreprocessPolicy default_preprocess_policy();

struct DataStats {
    std::size_t length = 0;
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
    TrendDirection trend = TrendDirection::stable;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    std::size_t missing_count = 0;

    double missing_fraction() const noexcept {
        return length == 0 ? 0.0 : static_cast<double>(missing_count) / static_cast<double>(length);
    }
};

struct QualityDiagnostics {
    DataStats stats;
    IndexSet missing_indices;
    IndexSet outlier_indices;
    PreprocessPolicy policy;
    double quality_score = 1.0;
};

// Detection. Rolling windows are trailing and exclude the candidate point: the
// reference window for index t is positions [t - window, t - 1], so indices
// below `window` are never flagged. Missing slots are skipped inside windows
// and are never flagged themselves.

IndexSet detect_outliers_iqr(const Series& series, std::size_t window, double alpha);
IndexSet detect_outliers_zscore(const Series& series, std::size_t window, double alpha, bool robust);
/// Quantiles come from `frozen_on` when given, else from the series itself.
IndexSet detect_outliers_percentile(const Series& series, double lower_pct, double upper_pct,
                                    const std::optional<Series>& frozen_on = std::nullopt);
IndexSet detect_outliers(const Series& series, const DetectionPolicy& policy);

Series repair_outliers(const Series& series, const IndexSet& flags, const RepairPolicy& policy);
Series fill_missing(const Series& series, const RepairPolicy& policy);

DataStats compute_stats(const Series& series);
IndexSet missing_indices(const Series& series);

/// Fills missing values first so detection windows are dense, then detects.
QualityDiagnostics diagnose(const Series& series, const PreprocessPolicy& policy);
/// fill_missing, then detect and repair outliers on the filled series.
Series apply_preprocessing(const Series& series, const PreprocessPolicy& policy);

std::string_view to_string(DetectionMethod m) noexcept;
std::string_view to_string(OutlierHandling h) noexcept;
std::string_view to_string(MissingFill f) noexcept;
DetectionMethod detection_method_from_string(std::string_view s);
OutlierHandling outlier_handling_from_string(std::string_view s);
MissingFill missing_fill_from_string(std::string_view s);

void to_json(nlohmann::json& j, const DetectionPolicy& p);
void from_json(const nlohmann::json& j, DetectionPolicy& p);
void to_json(nlohmann::json& j, const RepairPolicy& p);
void from_json(const nlohmann::json& j, RepairPolicy& p);
void to_json(nlohmann::json& j, const PreprocessPolicy& p);
void from_json(const nlohmann::json& j, PreprocessPolicy& p);
void to_json(nlohmann::json& j, const DataStats& s);
void to_json(nlohmann::json& j, const QualityDiagnostics& d);

}  // namespace tsci
