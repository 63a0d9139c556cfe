#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bomf {

using Point = std::vector<double>;

/// Mutually non-dominated points (maximization), each strictly above the
/// zero reference in every coordinate. `ids` are the evaluation indices the
/// points came from, in first-seen order.
struct ParetoFront {
    std::vector<Point> points;
    std::vector<std::int64_t> ids;

    [[nodiscard]] bool empty() const { return points.empty(); }
    [[nodiscard]] std::size_t size() const { return points.size(); }
};

struct HypervolumeResult {
    double value = 0.0;
    bool exact = true;
    double std_error = 0.0;  // MC standard error; zero when exact
};

/// Weak Pareto dominance: a >= b everywhere and a > b somewhere.
[[nodiscard]] bool dominates(std::span<const double> a, std::span<const double> b);

/// Maximal elements of `points`. Points with any coordinate <= 0 are
/// dropped; exact duplicates keep the first occurrence. If `ids` is empty the
/// input positions are used.
[[nodiscard]] ParetoFront pareto_front(const std::vector<Point>& points, std::span<const std::int64_t> ids = {});

inline constexpr std::size_t kHvMonteCarloSamples = 100000;

/// Hypervolume dominated by the points against the zero reference. Exact for
/// two and three objectives, Monte Carlo (seeded) above that. Dominated
/// inputs are allowed and contribute nothing. Throws InvalidArgument if a
/// point has a coordinate <= 0.
[[nodiscard]] HypervolumeResult hypervolume_detailed(const std::vector<Point>& points, std::uint64_t mc_seed = 0,
                                                     std::size_t mc_samples = kHvMonteCarloSamples);
[[nodiscard]] double hypervolume(const ParetoFront& front, std::uint64_t mc_seed = 0);
[[nodiscard]] double hypervolume(const std::vector<Point>& points, std::uint64_t mc_seed = 0);

/// HV(front + candidate) - HV(front). A candidate with a coordinate <= 0
/// adds nothing.
[[nodiscard]] double hv_improvement(const ParetoFront& front, std::span<const double> candidate,
                                    std::uint64_t mc_seed = 0);
[[nodiscard]] double hv_improvement(const std::vector<Point>& front, std::span<const double> candidate,
                                    std::uint64_t mc_seed = 0, std::size_t mc_samples = kHvMonteCarloSamples);

} // namespace bomf
