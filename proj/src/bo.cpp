#include "bomf/pipeline.hpp"
#include "bomf/random.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace bomf {

namespace {

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
}

/// Raw objective vector in spec order from a successful reply.
std::vector<double> raw_from_reply(const EvalReply& reply, const ObjectiveSpec& spec) {
    std::vector<double> raw;
    raw.reserve(spec.size());
    for (const auto& e : spec.entries()) {
        const auto it = reply.objectives.find(e.name);
        if (it == reply.objectives.end()) throw EvaluationError("reply lacks objective '" + e.name + "'");
        raw.push_back(it->second);
    }
    return raw;
}

/// Fills raw/normalized from the reply, or marks the observation failed.
void record_reply(Observation& obs, const EvalReply& reply, const ObjectiveSpec& spec) {
    try {
        if (!reply.ok) throw EvaluationError(reply.error);
        obs.raw = raw_from_reply(reply, spec);
        obs.normalized = spec.normalize_all(obs.raw);
        obs.failed = false;
    } catch (const EvaluationError&) {
        obs.raw.assign(spec.size(), std::numeric_limits<double>::quiet_NaN());
        obs.normalized.assign(spec.size(), 0.0);
        obs.failed = true;
    }
}

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return X;
}

} // namespace

std::map<std::string, double> named_params(const BoundedParamSpace& space, std::span<const double> x) {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < space.size(); ++i) out[space[i].name] = x[i];
    return out;
}

// ---- HPBO -------------------------------------------------------------------------

HpboState run_hpbo(const BoundedParamSpace& space, Trainer& trainer, const ObjectiveSpec& spec, const HpboConfig& cfg) {
    if (space.size() == 0) throw InvalidArgument("run_hpbo: empty parameter space");
    if (spec.count(ObjectiveKind::metric) == 0) throw InvalidArgument("run_hpbo: need at least one metric objective");
    if (cfg.n_init == 0) throw InvalidArgument("run_hpbo: n_init must be >= 1");
    cfg.acq.validate();

    HpboState st;
    st.space = space;
    st.seed = cfg.seed;
    std::vector<std::vector<double>> unit_x;

    auto evaluate = [&](std::vector<double> x) {
        Observation obs;
        obs.x = std::move(x);
        obs.meta.seed = cfg.seed;
        obs.meta.eval_index = static_cast<std::int64_t>(st.history.size());
        const auto t0 = std::chrono::steady_clock::now();
        EvalReply reply;
        try {
            reply = trainer.train({named_params(space, obs.x), {}, {}});
        } catch (const EvaluationError& e) {
            reply = EvalReply{};
            reply.error = e.what();
        }
        obs.meta.wall_ms = elapsed_ms(t0);
        record_reply(obs, reply, spec);
        const double score = obs.failed ? 0.0 : scalarize_sum(obs.normalized, spec, KindFilter::metrics);
        unit_x.push_back(space.to_unit(obs.x));
        st.scores.push_back(score);
        st.replies.push_back(std::move(reply));
        st.history.push_back(std::move(obs));
    };

    Rng rng(derive_seed(cfg.seed, 1));
    for (std::size_t i = 0; i < cfg.n_init; ++i) {
        std::vector<double> u(space.size());
        for (auto& v : u) v = uniform01(rng);
        evaluate(space.from_unit(u));
    }

    std::optional<KernelParams> warm;
    for (std::size_t t = 0; t < cfg.n_iter; ++t) {
        const auto X = rows_to_matrix(unit_x, space.size());
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(st.scores.data(), static_cast<Eigen::Index>(st.scores.size()));
        auto gcfg = cfg.gp;
        gcfg.seed = derive_seed(cfg.seed, 100 + t);
        gcfg.warm_start = warm;
        const GpModel gp = fit_gp(X, y, gcfg);
        warm = gp.params();
        const double best = y.maxCoeff();
        auto acq_cfg = cfg.acq;
        acq_cfg.seed = derive_seed(cfg.seed, 1000 + t);
        const auto u = optimize_acq(
            [&](std::span<const double> c) {
                const auto p = gp.predict_latent(c);
                return log_ei(p.mu, p.sigma, best);
            },
            unit_box(space.size()), acq_cfg);
        evaluate(space.from_unit(u));
        st.iteration = t + 1;
    }

    bool any_ok = false;
    for (std::size_t i = 0; i < st.history.size(); ++i) {
        if (st.history[i].failed) continue;
        if (!any_ok || st.scores[i] > st.scores[st.best_index]) st.best_index = i;
        any_ok = true;
    }
    if (!any_ok) throw EvaluationError("run_hpbo: every evaluation failed (last error: " + st.replies.back().error + ")");
    st.best_lambda = st.history[st.best_index].x;
    return st;
}

// ---- MOBO ---------------------------------------------------------------------------

MoboResult run_mobo(std::size_t n_members, Scorer& scorer, const ObjectiveSpec& spec, const MoboConfig& cfg) {
    if (n_members == 0) throw InvalidArgument("run_mobo: need at least one member");
    if (spec.size() == 0) throw InvalidArgument("run_mobo: empty objective spec");
    if (spec.count(ObjectiveKind::loss) > 1) throw InvalidArgument("run_mobo: at most one loss objective");
    if (cfg.best_member && *cfg.best_member >= n_members) throw InvalidArgument("run_mobo: best_member out of range");
    cfg.acq.validate();

    const std::size_t n = n_members;
    const std::size_t n_iter = n == 1 ? 0 : cfg.n_iter.value_or(5 * n);
    const std::uint64_t hv_seed = derive_seed(cfg.seed, 7);

    MoboState st;
    st.n_members = n;
    st.seed = cfg.seed;

    auto evaluate = [&](std::vector<double> delta) {
        Observation obs;
        obs.x = std::move(delta);
        obs.meta.seed = cfg.seed;
        obs.meta.eval_index = static_cast<std::int64_t>(st.history.size());
        const auto t0 = std::chrono::steady_clock::now();
        EvalReply reply;
        try {
            reply = scorer.score(obs.x);
        } catch (const EvaluationError& e) {
            reply = EvalReply{};
            reply.error = e.what();
        }
        obs.meta.wall_ms = elapsed_ms(t0);
        record_reply(obs, reply, spec);
        st.history.push_back(std::move(obs));

        std::vector<Point> pts;
        std::vector<std::int64_t> ids;
        for (const auto& h : st.history) {
            pts.push_back(h.normalized);
            ids.push_back(h.meta.eval_index);
        }
        st.front = pareto_front(pts, ids);
        st.hv_trace.push_back(hypervolume(st.front, hv_seed));
    };

    evaluate(SimplexCoefficients::uniform(n).values());
    if (n > 1) {
        evaluate(SimplexCoefficients::one_hot(n, cfg.best_member.value_or(n - 1)).values());
        Rng rng(derive_seed(cfg.seed, 1));
        while (st.history.size() < n + 1) evaluate(sample_flat_dirichlet(rng, n));
    }

    std::vector<std::optional<KernelParams>> warm(spec.size());
    for (std::size_t t = 0; t < n_iter; ++t) {
        std::vector<std::vector<double>> xs;
        for (const auto& h : st.history) xs.push_back(h.x);
        const auto X = rows_to_matrix(xs, n);

        std::vector<GpModel> models;
        models.reserve(spec.size());
        for (std::size_t k = 0; k < spec.size(); ++k) {
            Eigen::VectorXd y(static_cast<Eigen::Index>(st.history.size()));
            for (std::size_t i = 0; i < st.history.size(); ++i) y(static_cast<Eigen::Index>(i)) = st.history[i].normalized[k];
            auto gcfg = cfg.gp;
            gcfg.seed = derive_seed(cfg.seed, 100 + 16 * t + k);
            gcfg.warm_start = warm[k];
            models.push_back(fit_gp(X, y, gcfg));
            warm[k] = models.back().params();
        }
        auto acq_cfg = cfg.acq;
        acq_cfg.seed = derive_seed(cfg.seed, 10000 + t);
        const NehviEstimator nehvi(models, X, acq_cfg);
        evaluate(optimize_acq([&](std::span<const double> c) { return nehvi(c); }, SimplexDomain{n}, acq_cfg));
        st.iteration = t + 1;
    }

    auto delta = select_best_delta(st);
    return {std::move(delta), std::move(st)};
}

SimplexCoefficients select_best_delta(const MoboState& state) {
    if (state.history.empty()) throw InvalidArgument("select_best_delta: empty history");
    auto normalized_delta = [](const std::vector<double>& d) { return SimplexCoefficients(d); };
    if (!state.front.empty()) {
        std::size_t best = 0;
        double best_sum = -1.0;
        for (std::size_t i = 0; i < state.front.size(); ++i) {
            double s = 0.0;
            for (double v : state.front.points[i]) s += v;
            const bool better = s > best_sum || (s == best_sum && state.front.ids[i] < state.front.ids[best]);
            if (better) {
                best = i;
                best_sum = s;
            }
        }
        const auto id = state.front.ids[best];
        for (const auto& h : state.history)
            if (h.meta.eval_index == id) return normalized_delta(h.x);
    }
    for (const auto& h : state.history)
        if (!h.failed) return normalized_delta(h.x);
    return normalized_delta(state.history.front().x);
}

} // namespace bomf
