#include "bomf/pareto.hpp"

#include "bomf/error.hpp"
#include "bomf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bomf {

bool dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("dominates: length mismatch");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

namespace {

bool above_reference(const Point& p) {
    return std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v) && v > 0.0; });
}

void check_points(const std::vector<Point>& points) {
    if (points.empty()) return;
    const auto k = points.front().size();
    for (const auto& p : points) {
        if (p.size() != k) throw InvalidArgument("hypervolume: points have differing dimension");
        if (!above_reference(p)) throw InvalidArgument("hypervolume: point does not dominate the zero reference");
    }
}

double hv2d(std::vector<std::pair<double, double>> pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second > b.second);
    });
    double area = 0.0, covered = 0.0;
    for (const auto& [x, y] : pts) {
        if (y > covered) {
            area += x * (y - covered);
            covered = y;
        }
    }
    return area;
}

double hv3d(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a[2] > b[2]; });
    double vol = 0.0;
    std::vector<std::pair<double, double>> slice;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        slice.emplace_back(pts[i][0], pts[i][1]);
        const double next_z = i + 1 < pts.size() ? pts[i + 1][2] : 0.0;
        const double dz = pts[i][2] - next_z;
        if (dz > 0.0) vol += dz * hv2d(slice);
    }
    return vol;
}

HypervolumeResult hv_monte_carlo(const std::vector<Point>& pts, std::uint64_t seed, std::size_t samples) {
    const auto k = pts.front().size();
    Point upper(k, 0.0);
    for (const auto& p : pts)
        for (std::size_t j = 0; j < k; ++j) upper[j] = std::max(upper[j], p[j]);
    const double box = std::accumulate(upper.begin(), upper.end(), 1.0, std::multiplies<>());
    Rng rng(seed);
    Point s(k);
    std::size_t hits = 0;
    for (std::size_t n = 0; n < samples; ++n) {
        for (std::size_t j = 0; j < k; ++j) s[j] = uniform01(rng) * upper[j];
        for (const auto& p : pts) {
            bool covered = true;
            for (std::size_t j = 0; j < k && covered; ++j) covered = s[j] <= p[j];
            if (covered) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    return {box * frac, false, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

} // namespace

ParetoFront pareto_front(const std::vector<Point>& points, std::span<const std::int64_t> ids) {
    if (!ids.empty() && ids.size() != points.size()) throw InvalidArgument("pareto_front: ids/points length mismatch");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points.empty() && points[i].size() != points.front().size())
            throw InvalidArgument("pareto_front: points have differing dimension");
        if (!above_reference(points[i])) continue;
        const bool duplicate = std::any_of(keep.begin(), keep.end(), [&](auto j) { return points[j] == points[i]; });
        if (!duplicate) keep.push_back(i);
    }
    ParetoFront front;
    for (auto i : keep) {
        const bool dominated =
            std::any_of(keep.begin(), keep.end(), [&](auto j) { return j != i && dominates(points[j], points[i]); });
        if (dominated) continue;
        front.points.push_back(points[i]);
        front.ids.push_back(ids.empty() ? static_cast<std::int64_t>(i) : ids[i]);
    }
    return front;
}

HypervolumeResult hypervolume_detailed(const std::vector<Point>& points, std::uint64_t mc_seed,
                                       std::size_t mc_samples) {
    check_points(points);
    if (points.empty()) return {};
    const auto k = points.front().size();
    if (k == 0) throw InvalidArgument("hypervolume: zero-dimensional points");
    if (k == 1) {
        double best = 0.0;
        for (const auto& p : points) best = std::max(best, p[0]);
        return {best, true, 0.0};
    }
    if (k == 2) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(points.size());
        for (const auto& p : points) pts.emplace_back(p[0], p[1]);
        return {hv2d(std::move(pts)), true, 0.0};
    }
    if (k == 3) return {hv3d(points), true, 0.0};
    return hv_monte_carlo(pareto_front(points).points, mc_seed, mc_samples);
}

double hypervolume(const std::vector<Point>& points, std::uint64_t mc_seed) {
    return hypervolume_detailed(points, mc_seed).value;
}

double hypervolume(const ParetoFront& front, std::uint64_t mc_seed) { return hypervolume(front.points, mc_seed); }

double hv_improvement(const std::vector<Point>& front, std::span<const double> candidate, std::uint64_t mc_seed,
                      std::size_t mc_samples) {
    check_points(front);
    if (!front.empty() && front.front().size() != candidate.size())
        throw InvalidArgument("hv_improvement: candidate dimension mismatch");
    for (double c : candidate)
        if (!(c > 0.0)) return 0.0;
    // The candidate's exclusive contribution: its own box minus the part of
    // it already dominated, which is the union of the clipped boxes.
    double box = 1.0;
    for (double c : candidate) box *= c;
    std::vector<Point> clipped;
    clipped.reserve(front.size());
    for (const auto& p : front) {
        Point q(p.size());
        for (std::size_t j = 0; j < p.size(); ++j) q[j] = std::min(p[j], candidate[j]);
        clipped.push_back(std::move(q));
    }
    return std::max(0.0, box - hypervolume_detailed(clipped, mc_seed, mc_samples).value);
}

double hv_improvement(const ParetoFront& front, std::span<const double> candidate, std::uint64_t mc_seed) {
    return hv_improvement(front.points, candidate, mc_seed);
}

} // namespace bomf
