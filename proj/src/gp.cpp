#include "bomf/gp.hpp"

#include "bomf/error.hpp"
#include "bomf/random.hpp"
#include "nelder_mead.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bomf {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964;
constexpr double kSigmaFloor = 1e-12;

double matern_from_r(double r, double signal_var) {
    const double s = kSqrt5 * r;
    return signal_var * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

void check_params(const KernelParams& p, Eigen::Index dim) {
    if (p.lengthscales.size() != dim) throw InvalidArgument("gp: lengthscale count must equal input dim");
    if ((p.lengthscales.array() <= 0.0).any()) throw InvalidArgument("gp: lengthscales must be > 0");
    if (!(p.signal_var > 0.0)) throw InvalidArgument("gp: signal_var must be > 0");
    if (!(p.noise_var >= 0.0)) throw InvalidArgument("gp: noise_var must be >= 0");
}

} // namespace

double matern52(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                const KernelParams& p) {
    const double r = ((a - b).array() / p.lengthscales.array()).matrix().norm();
    return matern_from_r(r, p.signal_var);
}

GpModel::GpModel(Eigen::MatrixXd X, const Eigen::VectorXd& y, KernelParams params)
    : X_(std::move(X)), params_(std::move(params)) {
    const auto n = X_.rows();
    if (n < 1) throw InvalidArgument("gp: need at least one training point");
    if (y.size() != n) throw InvalidArgument("gp: X rows and y length differ");
    if (!X_.allFinite()) throw InvalidArgument("gp: non-finite training input");
    if (!y.allFinite()) throw EvaluationError("gp: non-finite training target");
    check_params(params_, X_.cols());

    y_mean_ = y.mean();
    y_scale_ = 1.0;
    if (n >= 2) {
        const double sd = std::sqrt((y.array() - y_mean_).square().sum() / static_cast<double>(n - 1));
        if (sd > 1e-12 * (1.0 + std::abs(y_mean_))) y_scale_ = sd;
    }
    y_std_ = (y.array() - y_mean_) / y_scale_;

    Xs_ = scaled_columns(X_);
    Eigen::MatrixXd K = kernel_scaled(Xs_, Xs_, true);
    K.diagonal().array() += params_.noise_var;
    static constexpr double ladder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
    for (double jitter : ladder) {
        Eigen::MatrixXd Kj = K;
        Kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(Kj);
        if (llt.info() != Eigen::Success) continue;
        Eigen::MatrixXd L = llt.matrixL();
        if (!L.allFinite() || (L.diagonal().array() <= 0.0).any()) continue;
        chol_ = std::move(L);
        jitter_ = jitter;
        alpha_ = y_std_;
        chol_.triangularView<Eigen::Lower>().solveInPlace(alpha_);
        chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
        return;
    }
    throw NumericalError("gp: Cholesky failed after jitter escalation to 1e-4");
}

Eigen::MatrixXd GpModel::scaled_columns(const Eigen::MatrixXd& A) const {
    if (&A == &X_ && Xs_.size() > 0) return Xs_;
    return (A.transpose().array().colwise() * params_.lengthscales.cwiseInverse().array()).matrix();
}

Eigen::MatrixXd GpModel::kernel_scaled(const Eigen::MatrixXd& As, const Eigen::MatrixXd& Bs, bool symmetric) const {
    Eigen::ArrayXXd R(As.cols(), Bs.cols());
    for (Eigen::Index j = 0; j < Bs.cols(); ++j) {
        if (symmetric) {
            R(j, j) = 0.0;
            for (Eigen::Index i = 0; i < j; ++i) R(i, j) = R(j, i) = (As.col(i) - Bs.col(j)).norm();
        } else {
            for (Eigen::Index i = 0; i < As.cols(); ++i) R(i, j) = (As.col(i) - Bs.col(j)).norm();
        }
    }
    const Eigen::ArrayXXd S = kSqrt5 * R;
    return (params_.signal_var * (1.0 + S + S.square() / 3.0) * (-S).exp()).matrix();
}

Eigen::MatrixXd GpModel::kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
    if (&A == &B) {
        const Eigen::MatrixXd As = scaled_columns(A);
        return kernel_scaled(As, As, true);
    }
    return kernel_scaled(scaled_columns(A), scaled_columns(B), false);
}

Eigen::MatrixXd GpModel::whitened_cross(const Eigen::MatrixXd& Q) const {
    Eigen::MatrixXd W = kernel_scaled(Xs_, scaled_columns(Q), false);
    chol_.triangularView<Eigen::Lower>().solveInPlace(W);
    return W;
}

Eigen::VectorXd GpModel::posterior_mean(const Eigen::MatrixXd& Q) const {
    const Eigen::VectorXd m = kernel_scaled(scaled_columns(Q), Xs_, false) * alpha_;
    return (m.array() * y_scale_ + y_mean_).matrix();
}

Eigen::MatrixXd GpModel::posterior_cov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const {
    const Eigen::MatrixXd WA = whitened_cross(A);
    const Eigen::MatrixXd WB = whitened_cross(B);
    return (kernel(A, B) - WA.transpose() * WB) * (y_scale_ * y_scale_);
}

Prediction GpModel::predict_latent(std::span<const double> x) const {
    if (x.size() != input_dim()) throw InvalidArgument("gp: query dimension mismatch");
    const Eigen::Map<const Eigen::RowVectorXd> q(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::MatrixXd Q = q;
    Eigen::VectorXd k = kernel_scaled(Xs_, scaled_columns(Q), false).col(0);
    const double mu_std = k.dot(alpha_);
    chol_.triangularView<Eigen::Lower>().solveInPlace(k);
    const double var = std::max(0.0, params_.signal_var - k.squaredNorm());
    return {y_mean_ + y_scale_ * mu_std, std::max(kSigmaFloor, y_scale_ * std::sqrt(var))};
}

Prediction GpModel::predict(std::span<const double> x) const {
    const Prediction latent = predict_latent(x);
    const double latent_var_std = latent.sigma / y_scale_;
    const double var = latent_var_std * latent_var_std + params_.noise_var;
    return {latent.mu, std::max(kSigmaFloor, y_scale_ * std::sqrt(var))};
}

double GpModel::log_marginal_likelihood() const {
    const auto n = static_cast<double>(X_.rows());
    return -0.5 * y_std_.dot(alpha_) - chol_.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * std::numbers::pi);
}

double log_marginal_likelihood(const GpModel& model) { return model.log_marginal_likelihood(); }

namespace {

// Packs (log lengthscales..., log signal_var[, log noise_var]).
struct LogBox {
    Eigen::VectorXd lo, hi;
};

KernelParams unpack(const Eigen::VectorXd& theta, Eigen::Index d, const GpFitConfig& cfg) {
    KernelParams p;
    p.lengthscales = theta.head(d).array().exp();
    p.signal_var = std::exp(theta(d));
    p.noise_var = cfg.fixed_noise ? *cfg.fixed_noise : std::exp(theta(d + 1));
    return p;
}

} // namespace

GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpFitConfig& cfg) {
    if (y.size() != X.rows()) throw InvalidArgument("fit_gp: X rows and y length differ");
    if (!y.allFinite()) throw EvaluationError("fit_gp: non-finite target");
    if (cfg.restarts < 1) throw InvalidArgument("fit_gp: restarts must be >= 1");
    const Eigen::Index d = X.cols();
    const Eigen::Index m = d + (cfg.fixed_noise ? 1 : 2);

    LogBox box{Eigen::VectorXd(m), Eigen::VectorXd(m)};
    box.lo.head(d).setConstant(std::log(cfg.lengthscale_lo));
    box.hi.head(d).setConstant(std::log(cfg.lengthscale_hi));
    box.lo(d) = std::log(cfg.signal_lo);
    box.hi(d) = std::log(cfg.signal_hi);
    if (!cfg.fixed_noise) {
        box.lo(d + 1) = std::log(cfg.noise_lo);
        box.hi(d + 1) = std::log(cfg.noise_hi);
    }

    auto clamp_box = [&](Eigen::VectorXd t) {
        return Eigen::VectorXd(t.cwiseMax(box.lo).cwiseMin(box.hi));
    };
    auto neg_lml = [&](const Eigen::VectorXd& theta) {
        try {
            const GpModel model(X, y, unpack(clamp_box(theta), d, cfg));
            const double v = model.log_marginal_likelihood();
            return std::isfinite(v) ? -v : std::numeric_limits<double>::max();
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::max();
        }
    };

    Rng rng(cfg.seed);
    std::vector<Eigen::VectorXd> starts;
    {
        Eigen::VectorXd t(m);
        if (cfg.warm_start) {
            t.head(d) = cfg.warm_start->lengthscales.array().log();
            t(d) = std::log(cfg.warm_start->signal_var);
            if (!cfg.fixed_noise) t(d + 1) = std::log(std::max(cfg.warm_start->noise_var, cfg.noise_lo));
        } else {
            t.head(d).setConstant(std::log(0.5));
            t(d) = 0.0;
            if (!cfg.fixed_noise) t(d + 1) = std::log(1e-3);
        }
        starts.push_back(clamp_box(t));
    }
    for (int r = 1; r < cfg.restarts; ++r) {
        Eigen::VectorXd t(m);
        for (Eigen::Index i = 0; i < m; ++i) t(i) = box.lo(i) + uniform01(rng) * (box.hi(i) - box.lo(i));
        starts.push_back(t);
    }

    double best_val = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta = starts.front();
    for (const auto& s : starts) {
        const auto res = detail::nelder_mead(neg_lml, s, 1.0, cfg.max_evals);
        if (res.value < best_val) {
            best_val = res.value;
            best_theta = res.x;
        }
    }
    return GpModel(X, y, unpack(clamp_box(best_theta), d, cfg));
}

} // namespace bomf
