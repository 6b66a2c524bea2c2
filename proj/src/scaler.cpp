#include "tsci/scaler.hpp"

#include "tsci/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace tsci {

AffineScaler AffineScaler::fit(std::span<const double> train, bool center_data) {
    if (train.empty()) throw std::invalid_argument("cannot fit a scaler on an empty segment");
    AffineScaler s;
    if (center_data) {
        s.center = stats::mean(train);
        s.scale = stats::stddev(train);
    } else {
        double sq = 0.0;
        for (double v : train) sq += v * v;
        s.scale = std::sqrt(sq / static_cast<double>(train.size()));
    }
    if (!(s.scale > 0.0) || !std::isfinite(s.scale)) s.scale = 1.0;
    return s;
}

std::vector<double> AffineScaler::transform(std::span<const double> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(transform(x));
    return out;
}

std::vector<double> AffineScaler::inverse(std::span<const double> ys) const {
    std::vector<double> out;
    out.reserve(ys.size());
    for (double y : ys) out.push_back(inverse(y));
    return out;
}

void to_json(nlohmann::json& j, const AffineScaler& s) { j = {{"center", s.center}, {"scale", s.scale}}; }

void from_json(const nlohmann::json& j, AffineScaler& s) {
    s.center = j.at("center").get<double>();
    s.scale = j.at("scale").get<double>();
    if (!(s.scale != 0.0) || !std::isfinite(s.scale) || !std::isfinite(s.center))
        throw std::invalid_argument("scaler requires a finite centre and a finite non-zero scale");
}

}  // namespace tsci
