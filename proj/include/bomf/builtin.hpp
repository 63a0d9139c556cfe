#pragma once

#include "bomf/evaluator.hpp"
#include "bomf/toybench.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace bomf::toy {

struct ToyTrainerOptions {
    ToyTaskConfig task;
    std::uint64_t train_seed = 0;
    ToyLambda defaults;          // used for hyperparameters the request omits
    double train_fraction = 1.0; // < 1 gives a cheaper proxy trainer
};

/// Trains the toy classifier in-process. Recognised hyperparameter names:
/// lr, batch_size, steps, weight_decay. Reply objectives are the validation
/// F1 ("f1") and loss ("loss") at the best step.
class ToyTrainer final : public Trainer {
public:
    explicit ToyTrainer(ToyTrainerOptions opts);
    EvalReply train(const TrainRequest& request) override;
    [[nodiscard]] const ToyTask& task() const { return task_; }

private:
    ToyTrainerOptions opts_;
    ToyTask task_;
};

/// Objectives of the fused toy classifier: "f1" and "loss" on the validation
/// split, "heldout_f1" and "heldout_loss" on the test split.
class ToyScorer final : public Scorer {
public:
    ToyScorer(ToyTask task, MemberSet members);
    EvalReply score(std::span<const double> delta) override;

private:
    ToyTask task_;
    MemberSet members_;
};

/// Objectives "loss" and "metric" of a synthetic landscape.
class LandscapeScorer final : public Scorer {
public:
    LandscapeScorer(SyntheticLandscape land, MemberSet members);
    EvalReply score(std::span<const double> delta) override;

private:
    SyntheticLandscape land_;
    MemberSet members_;
};

[[nodiscard]] std::string toy_task_descriptor(const ToyTaskConfig& cfg);
[[nodiscard]] std::string landscape_descriptor(std::size_t dim, double offset, double ruggedness, std::uint64_t seed);

/// Options from a JSON object (keys as in ToyTaskConfig plus train_seed,
/// train_fraction and default hyperparameters); missing keys keep defaults.
[[nodiscard]] ToyTrainerOptions parse_toy_trainer_options(const std::string& json_text);

/// Rebuilds the scorer matching the manifest's task descriptor.
[[nodiscard]] std::unique_ptr<Scorer> scorer_from_manifest(const std::filesystem::path& manifest);

/// Task kind named by the manifest's descriptor ("toy", "landscape") or "".
[[nodiscard]] std::string manifest_task_kind(const std::filesystem::path& manifest);

/// Linear combination sum_i delta_i w_i without simplex validation.
[[nodiscard]] Weights combine(const MemberSet& members, std::span<const double> delta);

} // namespace bomf::toy
