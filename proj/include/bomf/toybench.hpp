#pragma once

#include "bomf/fusion.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace bomf::toy {

// ---- synthetic landscapes ---------------------------------------------------

/// loss(w) = |w - loss_center|^2;
/// metric(w) = clip(exp(-|w - metric_center|^2) * (1 + ruggedness * P(w)), 0, 1)
/// with P an average of sines over seeded fixed frequencies (|P| <= 1).
struct SyntheticLandscape {
    std::size_t dim = 0;
    Weights loss_center;
    Weights metric_center;
    double ruggedness = 0.0;
    std::uint64_t rng_seed = 0;
    std::vector<Weights> frequencies;
    std::vector<double> phases;

    [[nodiscard]] double loss(std::span<const double> w) const;
    [[nodiscard]] double metric(std::span<const double> w) const;
};

inline constexpr std::size_t kRuggedTerms = 4;

/// metric_center = loss_center + offset * (seeded unit direction).
[[nodiscard]] SyntheticLandscape make_landscape(std::size_t dim, double offset, double ruggedness, std::uint64_t seed);

/// Members placed on a ring of radius `spread` around the loss optimum, in a
/// seeded random plane, with small isotropic jitter (a stand-in for the
/// orbit late SGD iterates trace around a minimum).
[[nodiscard]] MemberSet sample_members_near_loss_optimum(const SyntheticLandscape& land, std::size_t m, double spread,
                                                         std::uint64_t seed);

struct MisalignOptions {
    std::size_t dim = 5;
    double offset = 1.0;
    double ruggedness = 0.5;
    std::size_t members = 5;
    double spread = 0.8;
    std::size_t certificate_samples = 10000;
    int max_retries = 100;
};

struct MisalignedInstance {
    SyntheticLandscape landscape;
    MemberSet members;
    std::uint64_t seed_used = 0;        // seed that produced the certified instance
    std::vector<std::uint64_t> rejected_seeds;
    double best_member_metric = 0.0;
    double uniform_metric = 0.0;
    double best_mixture_metric = 0.0;   // max over the Dirichlet scan
};

/// Generates a landscape plus members and retries until the instance shows
/// the misalignment certificate: the uniform average scores below the best
/// member on metric, yet some convex combination scores above it. Throws
/// InvalidArgument after max_retries failures.
[[nodiscard]] MisalignedInstance make_misaligned_landscape(const MisalignOptions& opts, std::uint64_t seed);

struct Certificate {
    double best_member_metric = 0.0;
    double uniform_metric = 0.0;
    double best_mixture_metric = 0.0;
    [[nodiscard]] bool holds() const {
        return uniform_metric < best_member_metric && best_mixture_metric > best_member_metric;
    }
};

[[nodiscard]] Certificate check_certificate(const SyntheticLandscape& land, const MemberSet& members,
                                            std::size_t samples, std::uint64_t seed);

// ---- toy classifier ----------------------------------------------------------

struct Dataset {
    Eigen::MatrixXd X;     // rows are examples
    std::vector<int> y;    // 0/1 labels
};

struct ToyTaskConfig {
    std::size_t dim = 5;
    std::size_t n_train = 400;
    std::size_t n_val = 60;
    std::size_t n_test = 2000;
    double positive_rate = 0.3;
    double separation = 1.5;   // distance between class means
    std::uint64_t seed = 0;
};

struct ToyTask {
    ToyTaskConfig config;
    Dataset train, val, test;
};

[[nodiscard]] ToyTask make_toy_task(const ToyTaskConfig& cfg);

struct ToyLambda {
    double lr = 0.1;
    std::size_t batch_size = 16;
    std::size_t steps = 200;
    double weight_decay = 0.01;
};

struct StepRecord {
    double val_loss = 0.0;
    double val_f1 = 0.0;
};

struct TrainResult {
    std::vector<Member> checkpoints;     // at the requested schedule steps
    std::vector<StepRecord> per_step;    // index s = after s updates (0 = init)
    std::size_t convergence_step = 0;
    std::size_t best_step = 0;           // argmax val F1 (ties: latest)
    Weights best_weights;
    bool failed = false;
    std::string failure;
};

/// Seeded mini-batch gradient descent on L2-regularized logistic loss.
/// Diverged runs (loss > 1e6 or non-finite) come back with failed = true and
/// the record up to the failure.
[[nodiscard]] TrainResult train_toy(const ToyTask& task, const ToyLambda& lambda, std::uint64_t seed,
                                    std::span<const std::int64_t> schedule = {});

[[nodiscard]] double logistic_loss(std::span<const double> w, const Dataset& data);
[[nodiscard]] std::vector<int> predict_labels(std::span<const double> w, const Dataset& data);
[[nodiscard]] double f1_on(std::span<const double> w, const Dataset& data);

/// 2TP / (2TP + FP + FN); 0 when TP = 0.
[[nodiscard]] double f1_score(std::span<const int> preds, std::span<const int> labels);

/// Pearson correlation of average-tie fractional ranks.
[[nodiscard]] double spearman_rcc(std::span<const double> a, std::span<const double> b);

/// First step where the 10-step running mean of val loss stops improving by
/// more than 1e-4 (or the last step if it never does).
[[nodiscard]] std::size_t detect_convergence(std::span<const StepRecord> per_step);

} // namespace bomf::toy
