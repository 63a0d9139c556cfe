#pragma once

#include "bomf/core.hpp"
#include "bomf/gp.hpp"
#include "bomf/pareto.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace bomf {

struct AcqConfig {
    int n_restarts = 3;
    int n_raw_candidates = 256;
    int n_mc = 128;
    std::uint64_t seed = 0;
    int local_steps = 4;  // max coordinate sweeps per step size

    void validate() const;
};

/// Returned for EI == 0 (sigma == 0 and no improvement).
inline constexpr double kLogEiFloor = -1e12;

/// log E[max(0, Y - best)] for Y ~ N(mu, sigma^2), stable far into the
/// lower tail.
[[nodiscard]] double log_ei(double mu, double sigma, double best);

struct NehviEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// q=1 Monte-Carlo noisy expected hypervolume improvement against the zero
/// reference. Joint posterior samples at the observed points are drawn once
/// at construction (common random numbers); each candidate is then sampled
/// conditionally on them.
class NehviEstimator {
public:
    NehviEstimator(std::span<const GpModel> models, const Eigen::MatrixXd& observed_x, const AcqConfig& cfg);

    [[nodiscard]] NehviEstimate estimate(std::span<const double> candidate) const;
    [[nodiscard]] double operator()(std::span<const double> candidate) const { return estimate(candidate).value; }

private:
    struct PerObjective {
        const GpModel* model = nullptr;
        Eigen::MatrixXd whitened_obs;  // L^{-1} k(X_train, X_obs)
        Eigen::MatrixXd pinv_factor;   // Lambda^{-1/2} Q^T over the retained eigenpairs
        double tol = 0.0;
    };
    std::vector<PerObjective> objectives_;
    Eigen::MatrixXd observed_;
    std::vector<Eigen::MatrixXd> z_obs_;     // per objective: n_mc x n
    std::vector<Eigen::VectorXd> z_cand_;    // per objective: n_mc
    std::vector<std::vector<Point>> fronts_; // per sample
    int n_mc_ = 0;
};

[[nodiscard]] NehviEstimate nehvi_mc(std::span<const GpModel> models, std::span<const double> candidate,
                                     const Eigen::MatrixXd& observed_x, const AcqConfig& cfg);

struct BoxDomain {
    std::vector<double> lower;
    std::vector<double> upper;
};
struct SimplexDomain {
    std::size_t n = 0;
};
using Domain = std::variant<BoxDomain, SimplexDomain>;

[[nodiscard]] BoxDomain unit_box(std::size_t dim);
[[nodiscard]] std::size_t domain_dim(const Domain& d);

/// Clamps to >= 0 and rescales to sum 1; an all-zero input maps to the
/// barycenter.
void project_to_simplex(std::span<double> v);

using AcquisitionFn = std::function<double(std::span<const double>)>;

/// Random candidates (uniform box / flat Dirichlet) followed by cyclic
/// coordinate search from the best few. Throws NumericalError when the
/// acquisition is non-finite on every raw candidate.
[[nodiscard]] std::vector<double> optimize_acq(const AcquisitionFn& acq, const Domain& domain, const AcqConfig& cfg);

} // namespace bomf
