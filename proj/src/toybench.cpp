#include "bomf/toybench.hpp"

#include "bomf/error.hpp"
#include "bomf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace bomf::toy {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

Weights random_unit(Rng& rng, std::size_t dim) {
    Weights u(dim);
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& v : u) {
            v = standard_normal(rng);
            norm += v * v;
        }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (auto& v : u) v /= norm;
    return u;
}

} // namespace

double SyntheticLandscape::loss(std::span<const double> w) const {
    if (w.size() != dim) throw InvalidArgument("landscape: weight dimension mismatch");
    return sq_dist(w, loss_center);
}

double SyntheticLandscape::metric(std::span<const double> w) const {
    if (w.size() != dim) throw InvalidArgument("landscape: weight dimension mismatch");
    double p = 0.0;
    for (std::size_t j = 0; j < frequencies.size(); ++j) {
        double arg = phases[j];
        for (std::size_t i = 0; i < dim; ++i) arg += frequencies[j][i] * w[i];
        p += std::sin(arg);
    }
    if (!frequencies.empty()) p /= static_cast<double>(frequencies.size());
    const double v = std::exp(-sq_dist(w, metric_center)) * (1.0 + ruggedness * p);
    return std::clamp(v, 0.0, 1.0);
}

SyntheticLandscape make_landscape(std::size_t dim, double offset, double ruggedness, std::uint64_t seed) {
    if (dim < 1) throw InvalidArgument("make_landscape: dim must be >= 1");
    if (offset < 0.0 || ruggedness < 0.0) throw InvalidArgument("make_landscape: offset and ruggedness must be >= 0");
    Rng rng(seed);
    SyntheticLandscape land;
    land.dim = dim;
    land.ruggedness = ruggedness;
    land.rng_seed = seed;
    land.loss_center.resize(dim);
    for (auto& v : land.loss_center) v = standard_normal(rng);
    const Weights dir = random_unit(rng, dim);
    land.metric_center = land.loss_center;
    for (std::size_t i = 0; i < dim; ++i) land.metric_center[i] += offset * dir[i];
    for (std::size_t j = 0; j < kRuggedTerms; ++j) {
        Weights f(dim);
        for (auto& v : f) v = 3.0 * standard_normal(rng);
        land.frequencies.push_back(std::move(f));
        land.phases.push_back(2.0 * std::numbers::pi * uniform01(rng));
    }
    return land;
}

MemberSet sample_members_near_loss_optimum(const SyntheticLandscape& land, std::size_t m, double spread,
                                           std::uint64_t seed) {
    if (m < 1) throw InvalidArgument("sample_members: need at least one member");
    Rng rng(derive_seed(seed, 17));
    const Weights e1 = random_unit(rng, land.dim);
    Weights e2 = random_unit(rng, land.dim);
    if (land.dim > 1) {
        // Gram-Schmidt so the ring lies in a proper plane.
        double dot = 0.0;
        for (std::size_t i = 0; i < land.dim; ++i) dot += e1[i] * e2[i];
        double norm = 0.0;
        for (std::size_t i = 0; i < land.dim; ++i) norm += (e2[i] -= dot * e1[i]) * e2[i];
        norm = std::sqrt(norm);
        for (auto& v : e2) v /= norm;
    }
    const double phase0 = 2.0 * std::numbers::pi * uniform01(rng);
    std::vector<Member> members;
    for (std::size_t k = 0; k < m; ++k) {
        const double theta = phase0 + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m) +
                             0.3 * (uniform01(rng) - 0.5);
        const double radius = spread * (0.8 + 0.4 * uniform01(rng));
        Weights w = land.loss_center;
        for (std::size_t i = 0; i < land.dim; ++i)
            w[i] += radius * (std::cos(theta) * e1[i] + (land.dim > 1 ? std::sin(theta) * e2[i] : 0.0)) +
                    0.05 * standard_normal(rng);
        members.push_back({static_cast<std::int64_t>(k), static_cast<std::int64_t>(k + 1), std::move(w)});
    }
    return MemberSet(std::move(members));
}

Certificate check_certificate(const SyntheticLandscape& land, const MemberSet& members, std::size_t samples,
                              std::uint64_t seed) {
    Certificate c;
    c.best_member_metric = 0.0;
    for (const auto& m : members.members()) c.best_member_metric = std::max(c.best_member_metric, land.metric(m.weights));
    c.uniform_metric = land.metric(fuse(members, SimplexCoefficients::uniform(members.size())));
    Rng rng(seed);
    c.best_mixture_metric = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const auto delta = SimplexCoefficients(sample_flat_dirichlet(rng, members.size()));
        c.best_mixture_metric = std::max(c.best_mixture_metric, land.metric(fuse(members, delta)));
    }
    return c;
}

MisalignedInstance make_misaligned_landscape(const MisalignOptions& opts, std::uint64_t seed) {
    if (!(opts.offset > 0.0)) throw InvalidArgument("make_misaligned_landscape: offset must be > 0");
    if (opts.dim < 2) throw InvalidArgument("make_misaligned_landscape: dim must be >= 2");
    if (opts.members < 2) throw InvalidArgument("make_misaligned_landscape: need at least two members");
    std::vector<std::uint64_t> rejected;
    for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
        const auto s = attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt));
        auto land = make_landscape(opts.dim, opts.offset, opts.ruggedness, s);
        auto members = sample_members_near_loss_optimum(land, opts.members, opts.spread, s);
        const auto cert = check_certificate(land, members, opts.certificate_samples, derive_seed(s, 99));
        if (cert.holds()) {
            return {std::move(land),        std::move(members),     s,
                    std::move(rejected),    cert.best_member_metric, cert.uniform_metric,
                    cert.best_mixture_metric};
        }
        rejected.push_back(s);
    }
    throw InvalidArgument("make_misaligned_landscape: certificate not reached in " + std::to_string(opts.max_retries) +
                          " retries; parameters too tame");
}

// ---- toy classifier ------------------------------------------------------------

namespace {

Dataset draw(Rng& rng, std::size_t n, const ToyTaskConfig& cfg, const Weights& dir) {
    Dataset d;
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.dim));
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = uniform01(rng) < cfg.positive_rate ? 1 : 0;
        const double sign = label ? 0.5 : -0.5;
        d.y[i] = label;
        for (std::size_t j = 0; j < cfg.dim; ++j)
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                sign * cfg.separation * dir[j] + standard_normal(rng);
    }
    return d;
}

double logit(std::span<const double> w, const Dataset& data, Eigen::Index row) {
    const auto d = data.X.cols();
    double z = w[static_cast<std::size_t>(d)];
    for (Eigen::Index j = 0; j < d; ++j) z += w[static_cast<std::size_t>(j)] * data.X(row, j);
    return z;
}

// log(1 + exp(z)) - y z, overflow-safe.
double point_loss(double z, int y) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z; }

void check_weights(std::span<const double> w, const Dataset& data) {
    if (w.size() != static_cast<std::size_t>(data.X.cols()) + 1)
        throw InvalidArgument("toy model: weights must have dim + 1 entries");
}

} // namespace

ToyTask make_toy_task(const ToyTaskConfig& cfg) {
    if (cfg.dim < 1 || cfg.n_train < 1 || cfg.n_val < 1 || cfg.n_test < 1)
        throw InvalidArgument("make_toy_task: sizes must be >= 1");
    Rng rng(cfg.seed);
    const Weights dir = random_unit(rng, cfg.dim);
    ToyTask t;
    t.config = cfg;
    t.train = draw(rng, cfg.n_train, cfg, dir);
    t.val = draw(rng, cfg.n_val, cfg, dir);
    t.test = draw(rng, cfg.n_test, cfg, dir);
    return t;
}

double logistic_loss(std::span<const double> w, const Dataset& data) {
    check_weights(w, data);
    double total = 0.0;
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) total += point_loss(logit(w, data, i), data.y[static_cast<std::size_t>(i)]);
    return total / static_cast<double>(data.X.rows());
}

std::vector<int> predict_labels(std::span<const double> w, const Dataset& data) {
    check_weights(w, data);
    std::vector<int> out(static_cast<std::size_t>(data.X.rows()));
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) out[static_cast<std::size_t>(i)] = logit(w, data, i) > 0.0 ? 1 : 0;
    return out;
}

double f1_on(std::span<const double> w, const Dataset& data) { return f1_score(predict_labels(w, data), data.y); }

std::size_t detect_convergence(std::span<const StepRecord> per_step) {
    constexpr std::size_t window = 10;
    if (per_step.empty()) return 0;
    const std::size_t last = per_step.size() - 1;
    auto running = [&](std::size_t t) {
        double s = 0.0;
        for (std::size_t k = t + 1 - window; k <= t; ++k) s += per_step[k].val_loss;
        return s / window;
    };
    for (std::size_t t = window; t <= last; ++t) {
        if (t < window + 1) continue;
        if (running(t - 1) - running(t) <= 1e-4) return t;
    }
    return last;
}

TrainResult train_toy(const ToyTask& task, const ToyLambda& lambda, std::uint64_t seed,
                      std::span<const std::int64_t> schedule) {
    if (!(lambda.lr >= 0.0) || !std::isfinite(lambda.lr)) throw InvalidArgument("train_toy: lr must be >= 0");
    if (lambda.batch_size < 1) throw InvalidArgument("train_toy: batch_size must be >= 1");
    const auto& train = task.train;
    const std::size_t d = task.config.dim;
    const std::size_t n = static_cast<std::size_t>(train.X.rows());
    Weights w(d + 1, 0.0);
    Weights grad(d + 1);
    Rng rng(seed);

    TrainResult res;
    std::size_t next_ckpt = 0;
    auto record = [&](std::size_t step) {
        const double loss = logistic_loss(w, task.val);
        const double f1 = f1_on(w, task.val);
        if (res.per_step.empty() || f1 >= res.per_step[res.best_step].val_f1) {
            res.best_step = step;
            res.best_weights = w;
        }
        res.per_step.push_back({loss, f1});
        while (next_ckpt < schedule.size() && schedule[next_ckpt] == static_cast<std::int64_t>(step)) {
            res.checkpoints.push_back({static_cast<std::int64_t>(res.checkpoints.size()), schedule[next_ckpt], w});
            ++next_ckpt;
        }
        return loss;
    };
    record(0);

    for (std::size_t step = 1; step <= lambda.steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t b = 0; b < lambda.batch_size; ++b) {
            const auto i = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
            const double z = logit(w, train, i);
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double r = p - train.y[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < d; ++j) grad[j] += r * train.X(i, static_cast<Eigen::Index>(j));
            grad[d] += r;
        }
        for (std::size_t j = 0; j <= d; ++j) {
            double g = grad[j] / static_cast<double>(lambda.batch_size);
            if (j < d) g += lambda.weight_decay * w[j];
            w[j] -= lambda.lr * g;
        }
        const double loss = record(step);
        if (!std::isfinite(loss) || loss > 1e6) {
            res.failed = true;
            res.failure = "diverged at step " + std::to_string(step);
            break;
        }
    }

    res.convergence_step = detect_convergence(res.per_step);
    if (res.failed) res.best_weights.clear();
    return res;
}

double f1_score(std::span<const int> preds, std::span<const int> labels) {
    if (preds.size() != labels.size()) throw InvalidArgument("f1_score: length mismatch");
    if (preds.empty()) throw InvalidArgument("f1_score: empty input");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] && labels[i]) ++tp;
        else if (preds[i] && !labels[i]) ++fp;
        else if (!preds[i] && labels[i]) ++fn;
    }
    if (tp == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

namespace {

std::vector<double> fractional_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman_rcc(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("spearman_rcc: length mismatch");
    if (a.size() < 2) throw InvalidArgument("spearman_rcc: need at least two pairs");
    const auto ra = fractional_ranks(a), rb = fractional_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw InvalidArgument("spearman_rcc: zero rank variance");
    return sab / std::sqrt(saa * sbb);
}

} // namespace bomf::toy
