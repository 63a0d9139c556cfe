#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bomf {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent sub-stream seeds from a base
/// seed so every stage, iteration and restart is replayable on its own.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

[[nodiscard]] inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

[[nodiscard]] inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// Dirichlet(1, ..., 1): normalized unit exponentials, i.e. uniform on the
/// probability simplex.
[[nodiscard]] inline std::vector<double> sample_flat_dirichlet(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    double total = 0.0;
    for (auto& v : out) {
        double u = uniform01(rng);
        while (u <= 0.0) u = uniform01(rng);
        v = -std::log(u);
        total += v;
    }
    for (auto& v : out) v /= total;
    return out;
}

} // namespace bomf
