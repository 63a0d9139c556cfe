#include "bomf/acquisition.hpp"

#include "bomf/error.hpp"
#include "bomf/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace bomf {

void AcqConfig::validate() const {
    if (n_restarts < 1 || n_raw_candidates < 1 || n_mc < 1 || local_steps < 1)
        throw InvalidArgument("AcqConfig: all counts must be >= 1");
}

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// log(z * Phi(z) + phi(z)).
double log_h(double z) {
    if (z > -1.0) {
        const double Phi = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        const double phi = std::exp(-0.5 * z * z - kLogSqrt2Pi);
        return std::log(z * Phi + phi);
    }
    // h(z) = phi(t) * (1 - t R(t)) with t = -z and R the Mills ratio
    // Q(t) / phi(t).
    const double t = -z;
    double one_minus_tr;
    if (t <= 25.0) {
        const double Q = 0.5 * std::erfc(t / std::numbers::sqrt2);
        const double phi = std::exp(-0.5 * t * t - kLogSqrt2Pi);
        one_minus_tr = 1.0 - t * (Q / phi);
    } else {
        // R(t) = 1 / (t + T1), T_k = k / (t + T_{k+1}); then 1 - t R = T1 / (t + T1),
        // which avoids the cancellation in the direct form.
        double tail = 0.0;
        for (int k = 200; k >= 1; --k) tail = k / (t + tail);
        one_minus_tr = tail / (t + tail);
    }
    return -0.5 * t * t - kLogSqrt2Pi + std::log(one_minus_tr);
}

} // namespace

double log_ei(double mu, double sigma, double best) {
    if (sigma < 0.0) throw InvalidArgument("log_ei: sigma must be >= 0");
    if (sigma == 0.0) return mu > best ? std::log(mu - best) : kLogEiFloor;
    return std::log(sigma) + log_h((mu - best) / sigma);
}

NehviEstimator::NehviEstimator(std::span<const GpModel> models, const Eigen::MatrixXd& observed_x,
                               const AcqConfig& cfg)
    : n_mc_(cfg.n_mc) {
    cfg.validate();
    if (models.empty()) throw InvalidArgument("nehvi: need at least one model");
    const auto d = models.front().input_dim();
    for (const auto& m : models)
        if (m.input_dim() != d) throw InvalidArgument("nehvi: models disagree on input dimension");
    if (observed_x.rows() > 0 && static_cast<std::size_t>(observed_x.cols()) != d)
        throw InvalidArgument("nehvi: observed points have the wrong dimension");

    // Canonical row order so the estimate does not depend on history order.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(observed_x.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        for (Eigen::Index j = 0; j < observed_x.cols(); ++j)
            if (observed_x(a, j) != observed_x(b, j)) return observed_x(a, j) < observed_x(b, j);
        return false;
    });
    observed_.resize(observed_x.rows(), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < order.size(); ++i) observed_.row(static_cast<Eigen::Index>(i)) = observed_x.row(order[i]);

    const auto n = observed_.rows();
    const auto k_obj = models.size();
    Rng rng(cfg.seed);
    std::vector<Eigen::MatrixXd> samples(k_obj);
    for (std::size_t k = 0; k < k_obj; ++k) {
        PerObjective po;
        po.model = &models[k];
        const auto& p = models[k].params();
        po.tol = 1e-10 * models[k].y_scale() * models[k].y_scale() * p.signal_var;

        Eigen::MatrixXd z(n_mc_, n);
        Eigen::VectorXd zc(n_mc_);
        for (int s = 0; s < n_mc_; ++s) {
            for (Eigen::Index i = 0; i < n; ++i) z(s, i) = standard_normal(rng);
            zc(s) = standard_normal(rng);
        }

        Eigen::MatrixXd factor(n, n);
        po.pinv_factor.setZero(n, n);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
        if (n > 0) {
            po.whitened_obs = models[k].whitened_cross(observed_);
            mean = models[k].posterior_mean(observed_);
            const Eigen::MatrixXd cov = models[k].posterior_cov(observed_, observed_);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
            const Eigen::VectorXd lambda = eig.eigenvalues();
            const Eigen::MatrixXd& Q = eig.eigenvectors();
            for (Eigen::Index i = 0; i < n; ++i) {
                if (lambda(i) > po.tol) {
                    const double sq = std::sqrt(lambda(i));
                    factor.col(i) = Q.col(i) * sq;
                    po.pinv_factor.row(i) = Q.col(i).transpose() / sq;
                } else {
                    factor.col(i).setZero();
                }
            }
        }
        samples[k] = (z * factor.transpose()).rowwise() + mean.transpose();
        z_obs_.push_back(std::move(z));
        z_cand_.push_back(std::move(zc));
        objectives_.push_back(std::move(po));
    }

    fronts_.resize(static_cast<std::size_t>(n_mc_));
    std::vector<Point> pts(static_cast<std::size_t>(n), Point(k_obj));
    for (int s = 0; s < n_mc_; ++s) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (std::size_t k = 0; k < k_obj; ++k) pts[static_cast<std::size_t>(i)][k] = samples[k](s, i);
        auto& f = fronts_[static_cast<std::size_t>(s)];
        f = pareto_front(pts).points;
        if (k_obj == 2) std::sort(f.begin(), f.end(), [](const Point& a, const Point& b) { return a[1] < b[1]; });
    }
}

namespace {

// Improvement of (c0, c1) over a two-objective front sorted by the second
// coordinate (so the first is decreasing): candidate box minus the staircase
// of the clipped front.
double hvi_sorted_2d(const std::vector<Point>& front, double c0, double c1) {
    if (!(c0 > 0.0 && c1 > 0.0)) return 0.0;
    double covered = 0.0, prev = 0.0;
    for (const auto& p : front) {
        const double y = std::min(p[1], c1);
        covered += std::min(p[0], c0) * (y - prev);
        prev = y;
    }
    return std::max(0.0, c0 * c1 - covered);
}

} // namespace

NehviEstimate NehviEstimator::estimate(std::span<const double> candidate) const {
    const auto d = static_cast<Eigen::Index>(candidate.size());
    if (d != observed_.cols()) throw InvalidArgument("nehvi: candidate has the wrong dimension");
    const Eigen::Map<const Eigen::RowVectorXd> c(candidate.data(), d);
    const Eigen::MatrixXd C = c;
    const auto k_obj = objectives_.size();

    Eigen::MatrixXd values(n_mc_, static_cast<Eigen::Index>(k_obj));
    for (std::size_t k = 0; k < k_obj; ++k) {
        const auto& po = objectives_[k];
        const auto& model = *po.model;
        const double scale2 = model.y_scale() * model.y_scale();
        const Eigen::VectorXd wc = model.whitened_cross(C).col(0);
        const double mu = model.posterior_mean(C)(0);
        const double var_c = std::max(0.0, (model.params().signal_var - wc.squaredNorm()) * scale2);
        Eigen::VectorXd resid_std = Eigen::VectorXd::Zero(n_mc_);
        Eigen::VectorXd l;
        double cond_var = var_c;
        if (observed_.rows() > 0) {
            const Eigen::VectorXd cross =
                (model.kernel(observed_, C).col(0) - po.whitened_obs.transpose() * wc) * scale2;
            l = po.pinv_factor * cross;
            cond_var = var_c - l.squaredNorm();
        }
        const double cond_sd = cond_var > po.tol ? std::sqrt(cond_var) : 0.0;
        Eigen::VectorXd col = Eigen::VectorXd::Constant(n_mc_, mu) + cond_sd * z_cand_[k];
        if (observed_.rows() > 0) col += z_obs_[k] * l;
        values.col(static_cast<Eigen::Index>(k)) = col;
    }

    Point cp(k_obj);
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < n_mc_; ++s) {
        const auto& front = fronts_[static_cast<std::size_t>(s)];
        double hvi = 0.0;
        if (k_obj == 2) {
            hvi = hvi_sorted_2d(front, values(s, 0), values(s, 1));
        } else {
            for (std::size_t k = 0; k < k_obj; ++k) cp[k] = values(s, static_cast<Eigen::Index>(k));
            hvi = hv_improvement(front, cp, static_cast<std::uint64_t>(s), 4096);
        }
        sum += hvi;
        sum_sq += hvi * hvi;
    }
    const double n = static_cast<double>(n_mc_);
    const double mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    return {mean, std::sqrt(var / n)};
}

NehviEstimate nehvi_mc(std::span<const GpModel> models, std::span<const double> candidate,
                       const Eigen::MatrixXd& observed_x, const AcqConfig& cfg) {
    return NehviEstimator(models, observed_x, cfg).estimate(candidate);
}

BoxDomain unit_box(std::size_t dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }

std::size_t domain_dim(const Domain& d) {
    return std::visit(
        [](const auto& dom) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(dom)>, BoxDomain>)
                return dom.lower.size();
            else
                return dom.n;
        },
        d);
}

void project_to_simplex(std::span<double> v) {
    double total = 0.0;
    for (auto& x : v) {
        x = std::max(0.0, x);
        total += x;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
        return;
    }
    for (auto& x : v) x /= total;
}

namespace {

void project(const Domain& domain, std::vector<double>& x) {
    if (const auto* box = std::get_if<BoxDomain>(&domain)) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], box->lower[i], box->upper[i]);
    } else {
        project_to_simplex(x);
    }
}

double safe_eval(const AcquisitionFn& acq, const std::vector<double>& x) {
    const double v = acq(x);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

} // namespace

std::vector<double> optimize_acq(const AcquisitionFn& acq, const Domain& domain, const AcqConfig& cfg) {
    cfg.validate();
    const auto dim = domain_dim(domain);
    if (dim == 0) throw InvalidArgument("optimize_acq: empty domain");
    if (const auto* box = std::get_if<BoxDomain>(&domain)) {
        if (box->upper.size() != dim) throw InvalidArgument("optimize_acq: box bounds differ in length");
        for (std::size_t i = 0; i < dim; ++i)
            if (!(box->lower[i] <= box->upper[i])) throw InvalidArgument("optimize_acq: lower > upper");
    }

    Rng rng(cfg.seed);
    std::vector<std::vector<double>> cands;
    std::vector<double> vals;
    cands.reserve(static_cast<std::size_t>(cfg.n_raw_candidates));
    for (int c = 0; c < cfg.n_raw_candidates; ++c) {
        std::vector<double> x;
        if (const auto* box = std::get_if<BoxDomain>(&domain)) {
            x.resize(dim);
            for (std::size_t i = 0; i < dim; ++i) x[i] = box->lower[i] + uniform01(rng) * (box->upper[i] - box->lower[i]);
        } else {
            x = sample_flat_dirichlet(rng, dim);
        }
        vals.push_back(safe_eval(acq, x));
        cands.push_back(std::move(x));
    }

    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
    if (!std::isfinite(vals[order.front()]))
        throw NumericalError("optimize_acq: acquisition is non-finite on every candidate");

    std::vector<double> best = cands[order.front()];
    double best_val = vals[order.front()];
    const auto restarts = std::min<std::size_t>(static_cast<std::size_t>(cfg.n_restarts), order.size());
    for (std::size_t r = 0; r < restarts; ++r) {
        if (!std::isfinite(vals[order[r]])) break;
        std::vector<double> x = cands[order[r]];
        double fx = vals[order[r]];
        for (double step = 0.25; step >= 1e-4; step *= 0.5) {
            for (int sweep = 0; sweep < cfg.local_steps; ++sweep) {
                bool improved = false;
                for (std::size_t i = 0; i < dim; ++i) {
                    for (double sign : {1.0, -1.0}) {
                        std::vector<double> y = x;
                        y[i] += sign * step;
                        project(domain, y);
                        const double fy = safe_eval(acq, y);
                        if (fy > fx) {
                            x = std::move(y);
                            fx = fy;
                            improved = true;
                            break;
                        }
                    }
                }
                if (!improved) break;
            }
        }
        if (fx > best_val) {
            best_val = fx;
            best = std::move(x);
        }
    }
    project(domain, best);
    return best;
}

} // namespace bomf
