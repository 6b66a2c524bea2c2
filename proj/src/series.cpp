#include "tsci/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tsci {

Series::Series(std::vector<std::optional<double>> values, long start_index, double step)
    : values_(std::move(values)), start_index_(start_index), step_(step) {
    if (values_.empty()) throw std::invalid_argument("series must contain at least one slot");
    for (const auto& v : values_) {
        if (v && !std::isfinite(*v)) throw std::invalid_argument("series values must be finite");
    }
}

Series::Series(const std::vector<double>& values, long start_index, double step)
    : Series(std::vector<std::optional<double>>(values.begin(), values.end()), start_index, step) {}

double Series::value(std::size_t i) const {
    const auto& v = values_.at(i);
    if (!v) throw std::domain_error("missing value at index " + std::to_string(i));
    return *v;
}

std::size_t Series::missing_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](const auto& v) { return !v.has_value(); }));
}

std::vector<double> Series::dense() const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out.push_back(value(i));
    return out;
}

std::vector<double> Series::observed() const {
    std::vector<double> out;
    for (const auto& v : values_)
        if (v) out.push_back(*v);
    return out;
}

Series Series::slice(std::size_t begin, std::size_t length) const {
    if (length == 0 || begin + length > values_.size())
        throw std::out_of_range("slice outside series bounds");
    std::vector<std::optional<double>> part(values_.begin() + static_cast<std::ptrdiff_t>(begin),
                                            values_.begin() + static_cast<std::ptrdiff_t>(begin + length));
    return Series(std::move(part), start_index_ + static_cast<long>(begin), step_);
}

SplitSpec default_split(std::size_t input_length, std::size_t horizon) {
    if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
    const std::size_t val = std::min(horizon, input_length / 4);
    if (val == 0 || val >= input_length) throw std::invalid_argument("input window too short to split");
    return SplitSpec{input_length - val, val, horizon};
}

SplitSeries split(const Series& series, const SplitSpec& spec) {
    if (spec.train_len == 0 || spec.val_len == 0 || spec.test_horizon == 0)
        throw std::invalid_argument("split lengths must all be >= 1");
    const std::size_t need = spec.train_len + spec.val_len + spec.test_horizon;
    if (series.size() < need)
        throw std::invalid_argument("series of length " + std::to_string(series.size()) +
                                    " is shorter than the split total " + std::to_string(need));
    SplitSeries out{series.slice(0, spec.train_len), series.slice(spec.train_len, spec.val_len),
                    series.slice(spec.train_len + spec.val_len, spec.test_horizon)};
    if (out.train.has_missing() || out.val.has_missing())
        throw std::invalid_argument("train/validation segments must be repaired before splitting");
    return out;
}

namespace {

void check_pair(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.empty()) throw std::invalid_argument("metric input is empty");
    if (actual.size() != predicted.size())
        throw std::invalid_argument("metric inputs differ in length (" + std::to_string(actual.size()) +
                                    " vs " + std::to_string(predicted.size()) + ")");
}

}  // namespace

double mae(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - predicted[i]);
    return sum / static_cast<double>(actual.size());
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
    check_pair(actual, predicted);
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (std::abs(actual[i]) < kMapeEpsilon) continue;
        sum += std::abs(actual[i] - predicted[i]) / std::abs(actual[i]);
        ++used;
    }
    if (used == 0) throw std::domain_error("MAPE undefined: every target is below the zero guard");
    return 100.0 * sum / static_cast<double>(used);
}

MetricsPair score(std::span<const double> actual, std::span<const double> predicted) {
    return MetricsPair{mae(actual, predicted), mape(actual, predicted)};
}

MetricsPair score_observed(const Series& actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw std::invalid_argument("metric inputs differ in length");
    std::vector<double> a, p;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual.is_missing(i)) continue;
        a.push_back(*actual[i]);
        p.push_back(predicted[i]);
    }
    return score(a, p);
}

}  // namespace tsci
