#pragma once

#include "bomf/acquisition.hpp"
#include "bomf/core.hpp"
#include "bomf/evaluator.hpp"
#include "bomf/fusion.hpp"
#include "bomf/gp.hpp"
#include "bomf/pareto.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bomf {

// ---- stage 1: hyperparameters ---------------------------------------------

struct HpboConfig {
    std::size_t n_init = 3;
    std::size_t n_iter = 10;
    std::uint64_t seed = 0;
    GpFitConfig gp;
    AcqConfig acq;
};

struct HpboState {
    BoundedParamSpace space;
    std::vector<Observation> history;
    std::vector<double> scores;         // scalarized metric sum; 0 for failures
    std::vector<EvalReply> replies;
    std::vector<double> best_lambda;
    std::size_t best_index = 0;
    std::size_t iteration = 0;
    std::uint64_t seed = 0;
};

/// Seeded uniform initial design, then GP + LogEI rounds in the unit cube.
/// The score of a setting is the sum of its normalized metrics. Failed
/// trainer calls are kept with score 0. Throws EvaluationError when every
/// evaluation failed.
[[nodiscard]] HpboState run_hpbo(const BoundedParamSpace& space, Trainer& trainer, const ObjectiveSpec& spec,
                                 const HpboConfig& cfg);

[[nodiscard]] std::map<std::string, double> named_params(const BoundedParamSpace& space, std::span<const double> x);

// ---- stage 2: fusion coefficients -------------------------------------------

struct MoboConfig {
    std::optional<std::size_t> n_iter;      // default 5 * members
    std::uint64_t seed = 0;
    GpFitConfig gp;
    AcqConfig acq;
    std::optional<std::size_t> best_member; // one-hot in the initial design; default last member
};

struct MoboState {
    std::size_t n_members = 0;
    std::vector<Observation> history;
    ParetoFront front;
    std::vector<double> hv_trace;           // front hypervolume after each evaluation
    std::size_t iteration = 0;
    std::uint64_t seed = 0;
};

struct MoboResult {
    SimplexCoefficients delta_star;
    MoboState state;
};

/// Initial design (uniform, best one-hot, Dirichlet fill to members + 1
/// points) followed by n_iter rounds of per-objective GPs and Monte Carlo
/// noisy EHVI over the simplex. Scorer failures are kept as all-zero
/// observations.
[[nodiscard]] MoboResult run_mobo(std::size_t n_members, Scorer& scorer, const ObjectiveSpec& spec,
                                  const MoboConfig& cfg);

/// Evaluated front point with the largest sum of normalized objectives (ties:
/// lowest eval index). With an empty front (every value zero) the earliest
/// successful evaluation, else the first evaluation.
[[nodiscard]] SimplexCoefficients select_best_delta(const MoboState& state);

// ---- fusion stage with baselines ----------------------------------------------

struct MethodResult {
    std::string name;
    std::vector<double> delta;
    std::map<std::string, double> objectives;  // everything the scorer returned
    std::vector<double> normalized;            // per spec entry
    std::vector<std::int64_t> subset;          // greedy only: member indices
    bool ok = true;
    std::string error;
};

struct FusionStageConfig {
    std::vector<ObjectiveEntry> objectives;
    bool derive_windows = true;        // windows from the members' own scores
    std::size_t iters_per_member = 5;
    std::uint64_t seed = 0;
    GpFitConfig gp;
    AcqConfig acq;
    LearnedConfig learned;
    bool baselines = true;
};

struct FusionStageResult {
    ObjectiveSpec spec;
    std::vector<Observation> member_evals;  // one-hot scores, x = delta
    std::size_t best_member = 0;
    std::vector<MethodResult> methods;      // best_member, swa, greedy, learned, bomf
    std::optional<MoboResult> mobo;
    bool degenerate = false;                // single member: nothing to fuse
};

/// Scores every member, derives windows, runs the baselines and MOBO. All
/// fusion goes through `scorer`, so members are addressed by coefficient
/// vector only.
[[nodiscard]] FusionStageResult run_fusion_stage(std::size_t n_members, Scorer& scorer, const FusionStageConfig& cfg);

[[nodiscard]] const MethodResult& method(const FusionStageResult& r, const std::string& name);

// ---- configuration and end-to-end run -----------------------------------------

struct EvaluatorConfig {
    std::string builtin;        // "toy", "landscape"; empty for a subprocess
    std::string options_json;   // builtin options
    std::string command;
    std::vector<std::string> args;
    std::chrono::milliseconds timeout = kDefaultEvalTimeout;
};

struct PipelineConfig {
    BoundedParamSpace space;
    std::vector<ObjectiveEntry> objectives;  // metric windows used by stage 1
    std::size_t n_init = 3;
    std::size_t hpbo_iters = 10;
    std::size_t mobo_iters_per_member = 5;
    std::size_t n_members = 15;
    std::uint64_t seed = 0;
    std::optional<EvaluatorConfig> trainer;      // required by stage 1
    std::optional<EvaluatorConfig> scorer;       // required by stage 2
    std::optional<EvaluatorConfig> proxy_trainer;
    GpFitConfig gp;
    AcqConfig acq;
    LearnedConfig learned;
};

/// Throws InvalidArgument on a malformed document. Stage-specific keys
/// (space, trainer, scorer) are checked by the stage that needs them.
[[nodiscard]] PipelineConfig parse_pipeline_config(const std::string& json_text);

/// Stage settings derived from a config, as run_pipeline uses them.
[[nodiscard]] HpboConfig hpbo_config(const PipelineConfig& cfg);
[[nodiscard]] FusionStageConfig fusion_config(const PipelineConfig& cfg);

[[nodiscard]] std::unique_ptr<Trainer> make_trainer(const EvaluatorConfig& cfg);
[[nodiscard]] std::unique_ptr<Scorer> make_scorer(const EvaluatorConfig& cfg, const std::filesystem::path& manifest);

struct PipelineReport {
    HpboState hpbo;
    std::vector<std::int64_t> collect_steps;
    std::int64_t anchor_step = 0;
    std::int64_t total_steps = 0;
    bool short_window = false;
    std::filesystem::path manifest;
    FusionStageResult fusion;
};

/// Error raised inside a pipeline stage, tagged with the stage name.
class StageError : public EvaluationError {
public:
    StageError(std::string stage, const std::string& what)
        : EvaluationError(stage + ": " + what), stage_(std::move(stage)) {}
    [[nodiscard]] const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Stage 1, retraining at the chosen hyperparameters with member collection
/// into `out_dir/members`, then the fusion stage. Writes report.json and
/// history.csv into out_dir.
PipelineReport run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

// ---- outputs -----------------------------------------------------------------

inline constexpr const char* kHistoryCsvHeader = "stage,eval_index,failed,x,raw,normalized,on_front";

[[nodiscard]] std::string history_csv(const HpboState* hpbo, const FusionStageResult* fusion);
[[nodiscard]] std::string report_json(const PipelineReport& report, const PipelineConfig& cfg);
[[nodiscard]] std::string methods_json(const FusionStageResult& fusion);

// ---- misalignment demo ------------------------------------------------------------

struct DemoResult {
    std::uint64_t seed_used = 0;
    double certificate_best_member = 0.0;
    double certificate_uniform = 0.0;
    double certificate_best_mixture = 0.0;
    FusionStageResult fusion;
};

struct DemoOptions {
    std::size_t dim = 5;
    double offset = 1.0;
    double ruggedness = 0.5;
    std::size_t members = 5;
    double spread = 0.8;
    std::size_t iters_per_member = 5;
};

/// Certified misaligned landscape, all fusion methods on it. With a
/// non-empty out_dir also writes members/, comparison.csv and report.json.
DemoResult run_misalign_demo(const DemoOptions& opts, std::uint64_t seed, const std::filesystem::path& out_dir = {});

} // namespace bomf
