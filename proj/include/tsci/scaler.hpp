#pragma once

#include <json.hpp>

#include <span>
#include <vector>

namespace tsci {

/// y = (x - center) / scale, fitted on the training portion of a slice.
/// Modeling and ensembling happen in the scaled space; forecasts are inverted
/// before any metric is computed.
struct AffineScaler {
    double center = 0.0;
    double scale = 1.0;

    /// Z-score fit (population std). With `center_data` false the centre is
    /// kept at 0 and the scale is the root mean square, which preserves exact
    /// zeros for intermittent demand. A zero scale falls back to 1.
    static AffineScaler fit(std::span<const double> train, bool center_data = true);
    static AffineScaler identity() { return {}; }

    double transform(double x) const noexcept { return (x - center) / scale; }
    double inverse(double y) const noexcept { return y * scale + center; }
    std::vector<double> transform(std::span<const double> xs) const;
    std::vector<double> inverse(std::span<const double> ys) const;

    friend bool operator==(const AffineScaler&, const AffineScaler&) = default;
};

void to_json(nlohmann::json& j, const AffineScaler& s);
void from_json(const nlohmann::json& j, AffineScaler& s);

}  // namespace tsci
