#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace bomf {

/// Matérn-5/2 ARD kernel hyperparameters, in standardized target units.
struct KernelParams {
    Eigen::VectorXd lengthscales;
    double signal_var = 1.0;
    double noise_var = 1e-6;
};

/// Search box and budget for marginal-likelihood fitting.
struct GpFitConfig {
    int restarts = 8;
    std::uint64_t seed = 0;
    int max_evals = 400;          // Nelder-Mead evaluations per restart
    double lengthscale_lo = 1e-3, lengthscale_hi = 10.0;
    double signal_lo = 1e-3, signal_hi = 10.0;
    double noise_lo = 1e-8, noise_hi = 1.0;
    std::optional<double> fixed_noise;              // pin noise_var, fit the rest
    std::optional<KernelParams> warm_start;         // replaces the first default start
};

struct Prediction {
    double mu = 0.0;
    double sigma = 0.0;
};

[[nodiscard]] double matern52(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                              const KernelParams& p);

/// Exact GP posterior for fixed kernel parameters. Rows of X are inputs,
/// expected inside the unit cube. Immutable once built.
class GpModel {
public:
    /// Conditions on (X, y) with the given parameters. Targets are
    /// standardized internally. Throws NumericalError if the Cholesky
    /// factorization fails after the full jitter ladder.
    GpModel(Eigen::MatrixXd X, const Eigen::VectorXd& y, KernelParams params);

    /// Posterior predictive (noise included), de-standardized.
    [[nodiscard]] Prediction predict(std::span<const double> x) const;
    /// Posterior of the latent function (noise excluded), de-standardized.
    [[nodiscard]] Prediction predict_latent(std::span<const double> x) const;

    /// Latent posterior mean at each row of Q (de-standardized).
    [[nodiscard]] Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& Q) const;
    /// Latent posterior covariance between rows of A and rows of B (de-standardized).
    [[nodiscard]] Eigen::MatrixXd posterior_cov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const;
    /// L^{-1} k(X_train, Q); building block for posterior_cov.
    [[nodiscard]] Eigen::MatrixXd whitened_cross(const Eigen::MatrixXd& Q) const;
    [[nodiscard]] Eigen::MatrixXd kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) const;

    [[nodiscard]] double log_marginal_likelihood() const;

    [[nodiscard]] const KernelParams& params() const { return params_; }
    [[nodiscard]] const Eigen::MatrixXd& X() const { return X_; }
    [[nodiscard]] const Eigen::VectorXd& y_std() const { return y_std_; }
    [[nodiscard]] double y_mean() const { return y_mean_; }
    [[nodiscard]] double y_scale() const { return y_scale_; }
    [[nodiscard]] const Eigen::MatrixXd& chol() const { return chol_; }
    [[nodiscard]] const Eigen::VectorXd& alpha() const { return alpha_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] std::size_t input_dim() const { return static_cast<std::size_t>(X_.cols()); }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(X_.rows()); }

private:
    [[nodiscard]] Eigen::MatrixXd scaled_columns(const Eigen::MatrixXd& A) const;
    [[nodiscard]] Eigen::MatrixXd kernel_scaled(const Eigen::MatrixXd& As, const Eigen::MatrixXd& Bs, bool symmetric) const;

    Eigen::MatrixXd X_;
    Eigen::MatrixXd Xs_;   // inputs divided by lengthscales, one column per point
    Eigen::VectorXd y_std_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    KernelParams params_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

/// Multi-start Nelder-Mead over the log marginal likelihood in log-parameter
/// space. Deterministic in (X, y, cfg.seed, cfg.restarts).
[[nodiscard]] GpModel fit_gp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpFitConfig& cfg = {});

[[nodiscard]] double log_marginal_likelihood(const GpModel& model);

} // namespace bomf
