#include "tsci/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace tsci {

namespace {

constexpr double kMadToSigma = 1.4826;

// Sorted multiset of the observed values at positions [t - window, t - 1].
class TrailingWindow {
public:
    TrailingWindow(const Series& series, std::size_t window) : series_(series), window_(window) {}

    // Slides so that the window ends just before `t`. Calls must use t = 1, 2, ...
    void advance_to(std::size_t t) {
        insert(t - 1);
        if (t > window_) erase(t - 1 - window_);
    }

    const std::vector<double>& sorted() const noexcept { return sorted_; }

private:
    void insert(std::size_t i) {
        if (series_.is_missing(i)) return;
        const double v = *series_[i];
        sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), v), v);
    }
    void erase(std::size_t i) {
        if (series_.is_missing(i)) return;
        auto it = std::lower_bound(sorted_.begin(), sorted_.end(), *series_[i]);
        sorted_.erase(it);
    }

    const Series& series_;
    std::size_t window_;
    std::vector<double> sorted_;
};

void check_window(const Series& series, std::size_t window, std::size_t minimum) {
    if (window < minimum)
        throw std::invalid_argument("detection window must be >= " + std::to_string(minimum));
    if (window > series.size()) throw std::invalid_argument("detection window larger than series");
}

std::vector<bool> flag_mask(const Series& series, const IndexSet& flags) {
    std::vector<bool> mask(series.size(), false);
    for (std::size_t i : flags) {
        if (i >= series.size()) throw std::invalid_argument("flag index outside series");
        if (series.is_missing(i)) throw std::invalid_argument("a missing slot cannot be flagged as an outlier");
        mask[i] = true;
    }
    return mask;
}

// Positions usable as repair sources.
std::vector<bool> clean_mask(const Series& series, const std::vector<bool>& excluded) {
    std::vector<bool> clean(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) clean[i] = !series.is_missing(i) && !excluded[i];
    return clean;
}

std::optional<std::size_t> prev_clean(const std::vector<bool>& clean, std::size_t t) {
    for (std::size_t i = t; i-- > 0;)
        if (clean[i]) return i;
    return std::nullopt;
}

std::optional<std::size_t> next_clean(const std::vector<bool>& clean, std::size_t t) {
    for (std::size_t i = t + 1; i < clean.size(); ++i)
        if (clean[i]) return i;
    return std::nullopt;
}

// Shared replacement routine for outlier repair and missing-value fill. `target`
// marks positions to replace; `clean` marks positions usable as sources.
std::vector<std::optional<double>> replace_positions(const Series& series, const std::vector<bool>& target,
                                                     const std::vector<bool>& clean, std::string_view method,
                                                     std::size_t neighborhood) {
    std::vector<std::optional<double>> out = series.slots();
    const auto source = [&](std::size_t i) { return *series[i]; };

    for (std::size_t t = 0; t < series.size(); ++t) {
        if (!target[t]) continue;
        const auto left = prev_clean(clean, t);
        const auto right = next_clean(clean, t);
        if (!left && !right) throw std::invalid_argument("no clean value available to repair from");

        if (method == "interpolate") {
            if (left && right) {
                const double x0 = source(*left), x1 = source(*right);
                const double frac = static_cast<double>(t - *left) / static_cast<double>(*right - *left);
                out[t] = x0 + frac * (x1 - x0);
            } else {
                out[t] = source(left ? *left : *right);
            }
        } else if (method == "ffill") {
            out[t] = source(left ? *left : *right);
        } else if (method == "bfill") {
            out[t] = source(right ? *right : *left);
        } else if (method == "local_mean" || method == "local_median") {
            std::vector<double> hood;
            for (std::size_t i = t; i-- > 0 && hood.size() < neighborhood;)
                if (clean[i]) hood.push_back(source(i));
            if (hood.empty()) {
                for (std::size_t i = t + 1; i < series.size() && hood.size() < neighborhood; ++i)
                    if (clean[i]) hood.push_back(source(i));
            }
            out[t] = method == "local_mean" ? stats::mean(hood) : stats::median(std::move(hood));
        } else {
            throw std::invalid_argument("unsupported replacement method");
        }
    }
    return out;
}

}  // namespace

void DetectionPolicy::validate() const {
    if (method == DetectionMethod::none) return;
    if (method != DetectionMethod::percentile && window < 2)
        throw std::invalid_argument("detection window must be >= 2");
    if (!(alpha > 0.0)) throw std::invalid_argument("detection alpha must be > 0");
    if (!(lower_pct >= 0.0 && lower_pct < upper_pct && upper_pct <= 100.0))
        throw std::invalid_argument("percentile bounds must satisfy 0 <= lower < upper <= 100");
}

void RepairPolicy::validate() const {
    if (neighborhood < 1) throw std::invalid_argument("neighborhood must be >= 1");
    if (smooth_window < 1) throw std::invalid_argument("smooth_window must be >= 1");
    if (clip_bounds && clip_bounds->first > clip_bounds->second)
        throw std::invalid_argument("clip bounds are inverted");
}

PreprocessPolicy default_preprocess_policy() {
    PreprocessPolicy p;
    p.detection = DetectionPolicy{DetectionMethod::rolling_iqr, 24, 1.5, false, 1.0, 99.0};
    p.repair.outlier_handle = OutlierHandling::interpolate;
    p.repair.missing_fill = MissingFill::interpolate;
    return p;
}

IndexSet detect_outliers_iqr(const Series& series, std::size_t window, double alpha) {
    check_window(series, window, 4);
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    IndexSet flags;
    TrailingWindow win(series, window);
    for (std::size_t t = 1; t < series.size(); ++t) {
        win.advance_to(t);
        if (t < window || series.is_missing(t) || win.sorted().size() < 2) continue;
        const double q1 = stats::quantile_sorted(win.sorted(), 0.25);
        const double q3 = stats::quantile_sorted(win.sorted(), 0.75);
        const double iqr = q3 - q1;
        const double x = *series[t];
        if (x < q1 - alpha * iqr || x > q3 + alpha * iqr) flags.push_back(t);
    }
    return flags;
}

IndexSet detect_outliers_zscore(const Series& series, std::size_t window, double alpha, bool robust) {
    check_window(series, window, 2);
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    IndexSet flags;
    TrailingWindow win(series, window);
    for (std::size_t t = 1; t < series.size(); ++t) {
        win.advance_to(t);
        if (t < window || series.is_missing(t) || win.sorted().size() < 2) continue;
        const double x = *series[t];
        double center = 0.0, scale = 0.0;
        if (robust) {
            const auto& sorted = win.sorted();
            center = stats::median_sorted(sorted);
            std::vector<double> dev;
            dev.reserve(sorted.size());
            for (double v : sorted) dev.push_back(std::abs(v - center));
            scale = kMadToSigma * stats::median(std::move(dev));
        } else {
            // Position order keeps the accumulation order independent of sorting.
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t i = t - window; i < t; ++i) {
                if (series.is_missing(i)) continue;
                sum += *series[i];
                ++n;
            }
            center = sum / static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = t - window; i < t; ++i) {
                if (series.is_missing(i)) continue;
                ss += (*series[i] - center) * (*series[i] - center);
            }
            scale = std::sqrt(ss / static_cast<double>(n));
        }
        if (scale <= 0.0) continue;
        if (std::abs(x - center) / scale > alpha) flags.push_back(t);
    }
    return flags;
}

IndexSet detect_outliers_percentile(const Series& series, double lower_pct, double upper_pct,
                                    const std::optional<Series>& frozen_on) {
    if (!(lower_pct >= 0.0 && lower_pct < upper_pct && upper_pct <= 100.0))
        throw std::invalid_argument("percentile bounds must satisfy 0 <= lower < upper <= 100");
    std::vector<double> reference = frozen_on ? frozen_on->observed() : series.observed();
    if (reference.empty()) throw std::invalid_argument("percentile reference segment is empty");
    std::sort(reference.begin(), reference.end());
    const double lo = stats::quantile_sorted(reference, lower_pct / 100.0);
    const double hi = stats::quantile_sorted(reference, upper_pct / 100.0);
    IndexSet flags;
    for (std::size_t t = 0; t < series.size(); ++t) {
        if (series.is_missing(t)) continue;
        const double x = *series[t];
        if (x < lo || x > hi) flags.push_back(t);
    }
    return flags;
}

IndexSet detect_outliers(const Series& series, const DetectionPolicy& policy) {
    policy.validate();
    switch (policy.method) {
        case DetectionMethod::rolling_iqr: return detect_outliers_iqr(series, policy.window, policy.alpha);
        case DetectionMethod::rolling_zscore:
            return detect_outliers_zscore(series, policy.window, policy.alpha, policy.robust_center);
        case DetectionMethod::percentile:
            return detect_outliers_percentile(series, policy.lower_pct, policy.upper_pct);
        case DetectionMethod::none: return {};
    }
    return {};
}

Series repair_outliers(const Series& series, const IndexSet& flags, const RepairPolicy& policy) {
    policy.validate();
    if (policy.outlier_handle == OutlierHandling::drop)
        throw std::invalid_argument("outlier strategy 'drop' breaks contiguous indexing and is not supported");
    const auto flagged = flag_mask(series, flags);
    if (flags.empty()) return series;
    const auto clean = clean_mask(series, flagged);
    if (std::none_of(clean.begin(), clean.end(), [](bool b) { return b; }))
        throw std::invalid_argument("every observed point is flagged; nothing to repair from");

    std::vector<std::optional<double>> out;
    switch (policy.outlier_handle) {
        case OutlierHandling::clip: {
            double lo = 0.0, hi = 0.0;
            if (policy.clip_bounds) {
                std::tie(lo, hi) = *policy.clip_bounds;
            } else {
                bool first = true;
                for (std::size_t i = 0; i < series.size(); ++i) {
                    if (!clean[i]) continue;
                    lo = first ? *series[i] : std::min(lo, *series[i]);
                    hi = first ? *series[i] : std::max(hi, *series[i]);
                    first = false;
                }
            }
            out = series.slots();
            for (std::size_t t : flags) out[t] = std::clamp(*series[t], lo, hi);
            break;
        }
        case OutlierHandling::interpolate:
        case OutlierHandling::smooth:
            out = replace_positions(series, flagged, clean, "interpolate", policy.neighborhood);
            break;
        case OutlierHandling::ffill: out = replace_positions(series, flagged, clean, "ffill", policy.neighborhood); break;
        case OutlierHandling::bfill: out = replace_positions(series, flagged, clean, "bfill", policy.neighborhood); break;
        case OutlierHandling::local_mean:
            out = replace_positions(series, flagged, clean, "local_mean", policy.neighborhood);
            break;
        case OutlierHandling::local_median:
            out = replace_positions(series, flagged, clean, "local_median", policy.neighborhood);
            break;
        case OutlierHandling::drop: break;
    }

    if (policy.outlier_handle == OutlierHandling::smooth) {
        // Causal moving average over observed points; the first few use a shorter window.
        const auto replaced = out;
        for (std::size_t t = 0; t < replaced.size(); ++t) {
            if (!replaced[t]) continue;
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t i = t + 1; i-- > 0 && t - i < policy.smooth_window;) {
                if (!replaced[i]) continue;
                sum += *replaced[i];
                ++n;
            }
            out[t] = sum / static_cast<double>(n);
        }
    }
    return Series(std::move(out), series.start_index(), series.step());
}

Series fill_missing(const Series& series, const RepairPolicy& policy) {
    policy.validate();
    if (!series.has_missing()) return series;
    if (policy.missing_fill == MissingFill::drop)
        throw std::invalid_argument("missing-value strategy 'drop' breaks contiguous indexing and is not supported");

    std::vector<bool> target(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) target[i] = series.is_missing(i);

    if (policy.missing_fill == MissingFill::zero) {
        auto out = series.slots();
        for (auto& v : out)
            if (!v) v = 0.0;
        return Series(std::move(out), series.start_index(), series.step());
    }
    if (series.missing_count() == series.size())
        throw std::invalid_argument("series has no observed values to fill from");

    const auto clean = clean_mask(series, std::vector<bool>(series.size(), false));
    std::string_view method;
    switch (policy.missing_fill) {
        case MissingFill::interpolate: method = "interpolate"; break;
        case MissingFill::ffill: method = "ffill"; break;
        case MissingFill::bfill: method = "bfill"; break;
        case MissingFill::local_mean: method = "local_mean"; break;
        case MissingFill::local_median: method = "local_median"; break;
        default: break;
    }
    return Series(replace_positions(series, target, clean, method, policy.neighborhood), series.start_index(),
                  series.step());
}

IndexSet missing_indices(const Series& series) {
    IndexSet out;
    for (std::size_t i = 0; i < series.size(); ++i)
        if (series.is_missing(i)) out.push_back(i);
    return out;
}

DataStats compute_stats(const Series& series) {
    const auto values = series.observed();
    DataStats s;
    s.length = series.size();
    s.missing_count = series.missing_count();
    if (values.empty()) return s;
    s.mean = stats::mean(values);
    s.std = stats::stddev(values);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    s.trend = classify_trend(values);
    s.skewness = stats::skewness(values);
    s.excess_kurtosis = stats::excess_kurtosis(values);
    return s;
}

QualityDiagnostics diagnose(const Series& series, const PreprocessPolicy& policy) {
    QualityDiagnostics d;
    d.stats = compute_stats(series);
    d.missing_indices = missing_indices(series);
    d.policy = policy;
    const Series filled = fill_missing(series, policy.repair);
    auto flags = detect_outliers(filled, policy.detection);
    // Filled positions were missing in the raw data and stay in the missing set only.
    std::erase_if(flags, [&](std::size_t i) { return series.is_missing(i); });
    d.outlier_indices = std::move(flags);
    const double n = static_cast<double>(series.size());
    d.quality_score = std::clamp(
        1.0 - static_cast<double>(d.missing_indices.size() + d.outlier_indices.size()) / n, 0.0, 1.0);
    return d;
}

Series apply_preprocessing(const Series& series, const PreprocessPolicy& policy) {
    const Series filled = fill_missing(series, policy.repair);
    const auto flags = detect_outliers(filled, policy.detection);
    return repair_outliers(filled, flags, policy.repair);
}

// --- names ---------------------------------------------------------------

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table, const char* what) {
    for (const auto& [name, value] : table)
        if (name == s) return value;
    throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::pair<std::string_view, DetectionMethod>, 4> kDetectionNames{{
    {"rolling_iqr", DetectionMethod::rolling_iqr},
    {"rolling_zscore", DetectionMethod::rolling_zscore},
    {"percentile", DetectionMethod::percentile},
    {"none", DetectionMethod::none},
}};

constexpr std::array<std::pair<std::string_view, OutlierHandling>, 8> kHandlingNames{{
    {"clip", OutlierHandling::clip},
    {"interpolate", OutlierHandling::interpolate},
    {"ffill", OutlierHandling::ffill},
    {"bfill", OutlierHandling::bfill},
    {"local_mean", OutlierHandling::local_mean},
    {"local_median", OutlierHandling::local_median},
    {"smooth", OutlierHandling::smooth},
    {"drop", OutlierHandling::drop},
}};

constexpr std::array<std::pair<std::string_view, MissingFill>, 7> kFillNames{{
    {"interpolate", MissingFill::interpolate},
    {"ffill", MissingFill::ffill},
    {"bfill", MissingFill::bfill},
    {"local_mean", MissingFill::local_mean},
    {"local_median", MissingFill::local_median},
    {"zero", MissingFill::zero},
    {"drop", MissingFill::drop},
}};

template <typename E, std::size_t N>
std::string_view name_of(E value, const std::array<std::pair<std::string_view, E>, N>& table) {
    for (const auto& [name, v] : table)
        if (v == value) return name;
    return "unknown";
}

}  // namespace

std::string_view to_string(DetectionMethod m) noexcept { return name_of(m, kDetectionNames); }
std::string_view to_string(OutlierHandling h) noexcept { return name_of(h, kHandlingNames); }
std::string_view to_string(MissingFill f) noexcept { return name_of(f, kFillNames); }

DetectionMethod detection_method_from_string(std::string_view s) {
    return parse_enum(s, kDetectionNames, "detection method");
}
OutlierHandling outlier_handling_from_string(std::string_view s) {
    return parse_enum(s, kHandlingNames, "outlier handling");
}
MissingFill missing_fill_from_string(std::string_view s) { return parse_enum(s, kFillNames, "missing fill"); }

void to_json(nlohmann::json& j, const DetectionPolicy& p) {
    j = {{"method", to_string(p.method)},       {"window", p.window},       {"alpha", p.alpha},
         {"robust_center", p.robust_center}, {"lower_pct", p.lower_pct}, {"upper_pct", p.upper_pct}};
}

void from_json(const nlohmann::json& j, DetectionPolicy& p) {
    p.method = detection_method_from_string(j.at("method").get<std::string>());
    p.window = j.at("window").get<std::size_t>();
    p.alpha = j.at("alpha").get<double>();
    p.robust_center = j.at("robust_center").get<bool>();
    p.lower_pct = j.at("lower_pct").get<double>();
    p.upper_pct = j.at("upper_pct").get<double>();
}

void to_json(nlohmann::json& j, const RepairPolicy& p) {
    j = {{"outlier_handle", to_string(p.outlier_handle)},
         {"missing_fill", to_string(p.missing_fill)},
         {"neighborhood", p.neighborhood},
         {"smooth_window", p.smooth_window}};
    if (p.clip_bounds) j["clip_bounds"] = {p.clip_bounds->first, p.clip_bounds->second};
}

void from_json(const nlohmann::json& j, RepairPolicy& p) {
    p.outlier_handle = outlier_handling_from_string(j.at("outlier_handle").get<std::string>());
    p.missing_fill = missing_fill_from_string(j.at("missing_fill").get<std::string>());
    p.neighborhood = j.at("neighborhood").get<std::size_t>();
    p.smooth_window = j.at("smooth_window").get<std::size_t>();
    if (j.contains("clip_bounds"))
        p.clip_bounds = std::make_pair(j["clip_bounds"].at(0).get<double>(), j["clip_bounds"].at(1).get<double>());
    else
        p.clip_bounds.reset();
}

void to_json(nlohmann::json& j, const PreprocessPolicy& p) { j = {{"detection", p.detection}, {"repair", p.repair}}; }

void from_json(const nlohmann::json& j, PreprocessPolicy& p) {
    p.detection = j.at("detection").get<DetectionPolicy>();
    p.repair = j.at("repair").get<RepairPolicy>();
}

void to_json(nlohmann::json& j, const DataStats& s) {
    j = {{"length", s.length},
         {"mean", s.mean},
         {"std", s.std},
         {"min", s.min},
         {"max", s.max},
         {"trend", to_string(s.trend)},
         {"skewness", s.skewness},
         {"excess_kurtosis", s.excess_kurtosis},
         {"missing_count", s.missing_count},
         {"missing_percentage", 100.0 * s.missing_fraction()}};
}

void to_json(nlohmann::json& j, const QualityDiagnostics& d) {
    j = {{"stats", d.stats},
         {"missing_indices", d.missing_indices},
         {"outlier_indices", d.outlier_indices},
         {"policy", d.policy},
         {"quality_score", d.quality_score}};
}

}  // namespace tsci
