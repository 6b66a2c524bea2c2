#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

// Seeded signal generators shared by the test suites.
namespace tsci::testing {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0, double mean = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(mean, sd);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    auto steps = white_noise(n, seed);
    for (std::size_t i = 1; i < n; ++i) steps[i] += steps[i - 1];
    return steps;
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed) {
    auto e = white_noise(n + 200, seed);
    std::vector<double> x(n + 200, 0.0);
    for (std::size_t i = 1; i < x.size(); ++i) x[i] = phi * x[i - 1] + e[i];
    return {x.begin() + 200, x.end()};
}

inline std::vector<double> sinusoid(std::size_t n, double period, double amplitude = 1.0, double offset = 0.0,
                                    double phase = 0.0) {
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t)
        out[t] = offset + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase);
    return out;
}

/// Level 50, period-24 sinusoid of amplitude 10, slope `slope`, Gaussian noise.
inline std::vector<double> seasonal_series(std::size_t n, std::uint64_t seed, double noise_sd = 1.0,
                                           double slope = 0.0) {
    auto noise = white_noise(n, seed, noise_sd);
    auto s = sinusoid(n, 24.0, 10.0, 50.0);
    for (std::size_t t = 0; t < n; ++t) s[t] += slope * static_cast<double>(t) + noise[t];
    return s;
}

inline std::string source_path(const std::string& rel) { return std::string(TSCI_SOURCE_DIR) + "/" + rel; }

}  // namespace tsci::testing
