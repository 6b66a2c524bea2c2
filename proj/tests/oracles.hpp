#pragma once

// Brute-force reference implementations used as test oracles. They are written
// directly from the definitions, recomputing every window from scratch and
// sharing no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace tsci::oracle {

using Slots = std::vector<std::optional<double>>;

/// Type-7 quantile on a copy.
inline double quantile7(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const std::size_t j = static_cast<std::size_t>(std::floor(h));
    const std::size_t k = std::min(j + 1, v.size() - 1);
    return v[j] + (h - static_cast<double>(j)) * (v[k] - v[j]);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Observed values among the `window` positions strictly before t.
inline std::vector<double> trailing(const Slots& x, std::size_t t, std::size_t window) {
    std::vector<double> w;
    for (std::size_t i = t - window; i < t; ++i)
        if (x[i]) w.push_back(*x[i]);
    return w;
}

inline std::vector<std::size_t> iqr_flags(const Slots& x, std::size_t window, double alpha) {
    std::vector<std::size_t> out;
    for (std::size_t t = window; t < x.size(); ++t) {
        if (!x[t]) continue;
        const auto w = trailing(x, t, window);
        if (w.size() < 2) continue;
        const double q1 = quantile7(w, 0.25), q3 = quantile7(w, 0.75);
        if (*x[t] < q1 - alpha * (q3 - q1) || *x[t] > q3 + alpha * (q3 - q1)) out.push_back(t);
    }
    return out;
}

inline std::vector<std::size_t> zscore_flags(const Slots& x, std::size_t window, double alpha, bool robust) {
    std::vector<std::size_t> out;
    for (std::size_t t = window; t < x.size(); ++t) {
        if (!x[t]) continue;
        const auto w = trailing(x, t, window);
        if (w.size() < 2) continue;
        double center = 0.0, scale = 0.0;
        if (robust) {
            center = median(w);
            std::vector<double> dev;
            for (double v : w) dev.push_back(std::fabs(v - center));
            scale = 1.4826 * median(dev);
        } else {
            double sum = 0.0;
            for (double v : w) sum += v;
            center = sum / static_cast<double>(w.size());
            double ss = 0.0;
            for (double v : w) ss += (v - center) * (v - center);
            scale = std::sqrt(ss / static_cast<double>(w.size()));
        }
        if (scale <= 0.0) continue;
        if (std::fabs(*x[t] - center) / scale > alpha) out.push_back(t);
    }
    return out;
}

inline std::vector<std::size_t> percentile_flags(const Slots& x, double lo_pct, double hi_pct) {
    std::vector<double> ref;
    for (const auto& v : x)
        if (v) ref.push_back(*v);
    const double lo = quantile7(ref, lo_pct / 100.0), hi = quantile7(ref, hi_pct / 100.0);
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < x.size(); ++t)
        if (x[t] && (*x[t] < lo || *x[t] > hi)) out.push_back(t);
    return out;
}

/// Performance weights recomputed step by step in long double.
inline std::vector<double> performance_weights(const std::vector<double>& s, double beta, double tau, double lambda,
                                               double w_min, double w_max, double eps) {
    const std::size_t k = s.size();
    std::vector<long double> w(k);
    long double total = 0;
    for (std::size_t i = 0; i < k; ++i) {
        w[i] = std::pow(std::pow(static_cast<long double>(s[i]) + eps, -static_cast<long double>(beta)),
                        1.0L / static_cast<long double>(tau));
        total += w[i];
    }
    long double blended_total = 0;
    for (auto& v : w) {
        v = std::clamp<long double>(v / total, w_min, w_max);
        v = (1.0L - lambda) * v + lambda / static_cast<long double>(k);
        blended_total += v;
    }
    std::vector<double> out;
    for (auto v : w) out.push_back(static_cast<double>(v / blended_total));
    return out;
}

}  // namespace tsci::oracle
