#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tsci {

/// Uniformly indexed univariate series. Missing observations are explicit
/// empty slots, never NaN payloads.
class Series {
public:
    Series() = default;
    explicit Series(std::vector<std::optional<double>> values, long start_index = 0, double step = 1.0);
    explicit Series(const std::vector<double>& values, long start_index = 0, double step = 1.0);

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    long start_index() const noexcept { return start_index_; }
    double step() const noexcept { return step_; }

    bool is_missing(std::size_t i) const { return !values_.at(i).has_value(); }
    const std::optional<double>& operator[](std::size_t i) const { return values_[i]; }
    /// Throws std::domain_error when the slot is missing.
    double value(std::size_t i) const;

    const std::vector<std::optional<double>>& slots() const noexcept { return values_; }

    std::size_t missing_count() const noexcept;
    bool has_missing() const noexcept { return missing_count() > 0; }

    /// Dense copy; throws std::domain_error if any slot is missing.
    std::vector<double> dense() const;
    /// Observed values only, in order.
    std::vector<double> observed() const;

    /// Contiguous sub-series [begin, begin + length).
    Series slice(std::size_t begin, std::size_t length) const;

    friend bool operator==(const Series&, const Series&) = default;

private:
    std::vector<std::optional<double>> values_;
    long start_index_ = 0;
    double step_ = 1.0;
};

struct SplitSpec {
    std::size_t train_len = 0;
    std::size_t val_len = 0;
    std::size_t test_horizon = 0;

    std::size_t input_length() const noexcept { return train_len + val_len; }
};

/// Validation length mirrors the horizon: val = min(H, floor(T/4)), train = T - val.
SplitSpec default_split(std::size_t input_length, std::size_t horizon);

struct SplitSeries {
    Series train;
    Series val;
    Series test;
};

/// Three contiguous segments in temporal order. Train and validation must be
/// fully observed; the test segment is passed through as-is.
SplitSeries split(const Series& series, const SplitSpec& spec);

struct MetricsPair {
    double mae = 0.0;
    double mape = 0.0;
};

/// Targets with |y| below this are excluded from MAPE.
inline constexpr double kMapeEpsilon = 1e-8;

double mae(std::span<const double> actual, std::span<const double> predicted);
/// Percentage scale. Throws std::domain_error("MAPE undefined") when every
/// target is excluded by the zero guard.
double mape(std::span<const double> actual, std::span<const double> predicted);
MetricsPair score(std::span<const double> actual, std::span<const double> predicted);

/// Scores only the positions where `actual` is observed.
MetricsPair score_observed(const Series& actual, std::span<const double> predicted);

}  // namespace tsci
