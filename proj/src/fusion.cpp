#include "bomf/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bomf {

MemberSet::MemberSet(std::vector<Member> members) : members_(std::move(members)) {
    if (members_.empty()) throw InvalidArgument("MemberSet: need at least one member");
    dim_ = members_.front().weights.size();
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (members_[i].weights.size() != dim_) throw InvalidArgument("MemberSet: members differ in dimension");
        if (i > 0 && !(members_[i].step > members_[i - 1].step))
            throw InvalidArgument("MemberSet: steps must strictly increase");
        if (i > 0 && !(members_[i].id > members_[i - 1].id))
            throw InvalidArgument("MemberSet: ids must strictly increase");
    }
}

std::size_t MemberSet::index_of(std::int64_t id) const {
    for (std::size_t i = 0; i < members_.size(); ++i)
        if (members_[i].id == id) return i;
    throw InvalidArgument("MemberSet: unknown member id " + std::to_string(id));
}

SimplexCoefficients::SimplexCoefficients(std::vector<double> delta) : delta_(std::move(delta)) {
    if (delta_.empty()) throw InvalidArgument("simplex coefficients must be non-empty");
    double total = 0.0;
    for (double d : delta_) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw InvalidArgument("simplex coefficients must be finite and >= 0");
        total += d;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("simplex coefficients must sum to 1");
}

SimplexCoefficients SimplexCoefficients::uniform(std::size_t n) {
    return SimplexCoefficients(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexCoefficients SimplexCoefficients::one_hot(std::size_t n, std::size_t i) {
    std::vector<double> d(n, 0.0);
    d.at(i) = 1.0;
    return SimplexCoefficients(std::move(d));
}

CollectionSchedule collection_schedule(std::int64_t total_steps, std::int64_t convergence_step, std::size_t n) {
    if (!(convergence_step > 0 && convergence_step <= total_steps))
        throw InvalidArgument("collection_schedule: need 0 < convergence_step <= total_steps");
    if (n < 1) throw InvalidArgument("collection_schedule: n must be >= 1");
    const std::int64_t lo = (convergence_step + 1) / 2;
    const std::int64_t hi = std::min(2 * convergence_step, total_steps);
    const auto width = static_cast<std::size_t>(hi - lo + 1);

    CollectionSchedule out;
    if (width <= n) {
        for (auto s = lo; s <= hi; ++s) out.steps.push_back(s);
        out.short_window = width < n;
        return out;
    }
    if (n == 1) {
        out.steps.push_back(hi);
        return out;
    }
    // Spacing exceeds one step here, so rounding cannot produce duplicates.
    const double spacing = static_cast<double>(hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        out.steps.push_back(lo + static_cast<std::int64_t>(std::llround(spacing * static_cast<double>(i))));
    return out;
}

Weights fuse(const MemberSet& members, const SimplexCoefficients& delta) {
    if (delta.size() != members.size()) throw InvalidArgument("fuse: delta length differs from member count");
    Weights out(members.dim(), 0.0);
    for (std::size_t i = 0; i < members.size(); ++i) {
        const double d = delta[i];
        const auto& w = members[i].weights;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += d * w[j];
    }
    return out;
}

namespace {

SimplexCoefficients uniform_over(const MemberSet& members, std::span<const std::int64_t> ids) {
    std::vector<double> d(members.size(), 0.0);
    const double share = 1.0 / static_cast<double>(ids.size());
    for (auto id : ids) d[members.index_of(id)] = share;
    return SimplexCoefficients(std::move(d));
}

} // namespace

Weights fuse_uniform(const MemberSet& members, std::span<const std::int64_t> subset_ids) {
    if (subset_ids.empty()) throw InvalidArgument("fuse_uniform: empty subset");
    std::vector<std::int64_t> sorted(subset_ids.begin(), subset_ids.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw InvalidArgument("fuse_uniform: repeated member id");
    return fuse(members, uniform_over(members, subset_ids));
}

GreedyResult fuse_greedy(const MemberSet& members, const QualityFn& quality, bool keep_ties) {
    std::vector<double> solo(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) solo[i] = quality(members[i].weights);
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return solo[a] > solo[b]; });

    GreedyResult res;
    res.subset.push_back(members[order.front()].id);
    res.fused = members[order.front()].weights;
    res.quality = solo[order.front()];
    for (std::size_t k = 1; k < order.size(); ++k) {
        auto trial = res.subset;
        trial.push_back(members[order[k]].id);
        Weights w = fuse_uniform(members, trial);
        const double q = quality(w);
        if (q > res.quality || (keep_ties && q == res.quality)) {
            res.subset = std::move(trial);
            res.fused = std::move(w);
            res.quality = q;
        }
    }
    return res;
}

SimplexCoefficients fuse_learned(const MemberSet& members, const LossFn& loss, const LearnedConfig& cfg,
                                 const std::function<void(const SimplexCoefficients&)>& observer) {
    if (cfg.steps < 0 || !(cfg.lr >= 0.0) || !(cfg.fd_step > 0.0))
        throw InvalidArgument("fuse_learned: invalid configuration");
    const auto n = members.size();
    std::vector<double> delta(n, 1.0 / static_cast<double>(n));

    // The fused weights are linear in delta, so the loss can be probed off
    // the simplex by direct combination.
    auto loss_at = [&](const std::vector<double>& d) {
        Weights w(members.dim(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < w.size(); ++j) w[j] += d[i] * members[i].weights[j];
        return loss(w);
    };
    if (!std::isfinite(loss_at(delta))) throw EvaluationError("fuse_learned: loss is non-finite at the uniform start");
    if (observer) observer(SimplexCoefficients(delta));

    std::vector<double> grad(n);
    for (int step = 0; step < cfg.steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            auto plus = delta, minus = delta;
            plus[i] += cfg.fd_step;
            minus[i] -= cfg.fd_step;
            grad[i] = (loss_at(plus) - loss_at(minus)) / (2.0 * cfg.fd_step);
        }
        if (!std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) break;
        for (std::size_t i = 0; i < n; ++i) delta[i] -= cfg.lr * grad[i];
        double total = 0.0;
        for (auto& d : delta) total += (d = std::max(0.0, d));
        if (total > 0.0)
            for (auto& d : delta) d /= total;
        else
            std::fill(delta.begin(), delta.end(), 1.0 / static_cast<double>(n));
        if (observer) observer(SimplexCoefficients(delta));
    }
    return SimplexCoefficients(std::move(delta));
}

} // namespace bomf
