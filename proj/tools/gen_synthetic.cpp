// Writes the bundled synthetic dataset: daily (24) and weekly (168) cycles on a
// slow trend with Gaussian noise, a few missing cells and a few spikes.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

int main(int argc, char** argv) {
    CLI::App app{"Synthetic seasonal series generator"};
    std::string output = "data/synthetic_seasonal.csv";
    std::size_t length = 3000;
    std::uint64_t seed = 7;
    double missing_rate = 0.005;
    double spike_rate = 0.003;
    app.add_option("--output", output, "CSV file to write")->capture_default_str();
    app.add_option("--length", length, "Number of rows")->capture_default_str();
    app.add_option("--seed", seed, "Random seed")->capture_default_str();
    app.add_option("--missing-rate", missing_rate, "Share of empty cells")->capture_default_str();
    app.add_option("--spike-rate", spike_rate, "Share of injected spikes")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::ofstream out(output);
    if (!out) {
        std::cerr << "cannot write " << output << "\n";
        return 1;
    }
    out << "t,value\n";
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t t = 0; t < length; ++t) {
        const double x = static_cast<double>(t);
        double v = 50.0 + 0.004 * x + 10.0 * std::sin(two_pi * x / 24.0) + 3.0 * std::sin(two_pi * x / 168.0) + noise(rng);
        const double u = unit(rng);
        if (u < missing_rate) {
            out << t << ",\n";
            continue;
        }
        if (u < missing_rate + spike_rate) v += (unit(rng) < 0.5 ? -1.0 : 1.0) * 15.0;
        out << fmt::format("{},{:.6f}\n", t, v);
    }
    return 0;
}
