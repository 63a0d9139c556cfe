#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <sys/types.h>

namespace bomf {

/// Trainer request: one hyperparameter setting, optionally asking the trainer
/// to store checkpoints at `collect_steps` into `member_dir`.
struct TrainRequest {
    std::map<std::string, double> params;
    std::vector<std::int64_t> collect_steps;
    std::string member_dir;
};

/// Reply from either role. Trainers report the best validation objectives of
/// the trajectory; scorers report the objectives of the fused weights.
struct EvalReply {
    bool ok = false;
    std::map<std::string, double> objectives;
    std::optional<std::int64_t> convergence_step;
    std::optional<std::int64_t> best_step;
    std::optional<std::int64_t> total_steps;
    std::optional<std::string> manifest;
    std::string error;
};

class Trainer {
public:
    virtual ~Trainer() = default;
    /// Throws EvaluationError/ProtocolError on transport failures; ordinary
    /// training failures come back as ok = false.
    virtual EvalReply train(const TrainRequest& request) = 0;
};

class Scorer {
public:
    virtual ~Scorer() = default;
    /// Objectives of sum_i delta_i w_i. Finite-difference probes may send
    /// coefficients slightly off the simplex.
    virtual EvalReply score(std::span<const double> delta) = 0;
};

// ---- line protocol -----------------------------------------------------------

[[nodiscard]] std::string encode_trainer_request(std::int64_t id, const TrainRequest& req);
[[nodiscard]] std::string encode_scorer_request(std::int64_t id, std::span<const double> delta,
                                                const std::string& manifest);
/// Parses one reply line. Throws ProtocolError on malformed JSON, missing
/// fields, or an id different from `expected_id`.
[[nodiscard]] EvalReply decode_reply(const std::string& line, std::int64_t expected_id);
[[nodiscard]] std::string encode_reply(std::int64_t id, const EvalReply& reply);

inline constexpr std::chrono::milliseconds kDefaultEvalTimeout{600'000};

/// External evaluator speaking newline-delimited JSON over stdin/stdout.
/// The child is spawned lazily and respawned after a timeout or exit.
class SubprocessEvaluator final : public Trainer, public Scorer {
public:
    SubprocessEvaluator(std::string command, std::vector<std::string> args,
                        std::chrono::milliseconds timeout = kDefaultEvalTimeout);
    ~SubprocessEvaluator() override;
    SubprocessEvaluator(const SubprocessEvaluator&) = delete;
    SubprocessEvaluator& operator=(const SubprocessEvaluator&) = delete;

    EvalReply train(const TrainRequest& request) override;
    EvalReply score(std::span<const double> delta) override;

    /// Manifest path forwarded with every scorer request.
    void set_manifest(std::string manifest) { manifest_ = std::move(manifest); }

    /// Sends one line, waits for one line. Public for protocol tests.
    [[nodiscard]] std::string roundtrip(const std::string& line);
    [[nodiscard]] std::int64_t next_id() { return ++last_id_; }

private:
    void spawn();
    void terminate();

    std::string command_;
    std::vector<std::string> args_;
    std::chrono::milliseconds timeout_;
    std::string manifest_;
    std::int64_t last_id_ = 0;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

} // namespace bomf
