#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bomf/error.hpp"

namespace bomf {

using Weights = std::vector<double>;

struct Member {
    std::int64_t id = 0;
    std::int64_t step = 0;
    Weights weights;
};

/// Fusion members from one trajectory: equal dimension, strictly
/// increasing step with id order, at least one member.
class MemberSet {
public:
    explicit MemberSet(std::vector<Member> members);

    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] const Member& operator[](std::size_t i) const { return members_[i]; }
    [[nodiscard]] const std::vector<Member>& members() const { return members_; }
    [[nodiscard]] std::size_t index_of(std::int64_t id) const;

private:
    std::vector<Member> members_;
    std::size_t dim_ = 0;
};

/// Point on the probability simplex (entries >= 0, |sum - 1| <= 1e-9).
class SimplexCoefficients {
public:
    explicit SimplexCoefficients(std::vector<double> delta);
    [[nodiscard]] static SimplexCoefficients uniform(std::size_t n);
    [[nodiscard]] static SimplexCoefficients one_hot(std::size_t n, std::size_t i);

    [[nodiscard]] const std::vector<double>& values() const { return delta_; }
    [[nodiscard]] std::size_t size() const { return delta_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return delta_[i]; }

private:
    std::vector<double> delta_;
};

struct CollectionSchedule {
    std::vector<std::int64_t> steps;
    bool short_window = false;  // fewer than n distinct steps available
};

/// Member collection steps over [ceil(B/2), min(2B, T)].
[[nodiscard]] CollectionSchedule collection_schedule(std::int64_t total_steps, std::int64_t convergence_step,
                                                     std::size_t n = 15);

[[nodiscard]] Weights fuse(const MemberSet& members, const SimplexCoefficients& delta);
[[nodiscard]] Weights fuse_uniform(const MemberSet& members, std::span<const std::int64_t> subset_ids);

using QualityFn = std::function<double(const Weights&)>;
using LossFn = std::function<double(const Weights&)>;

struct GreedyResult {
    std::vector<std::int64_t> subset;  // member ids, in inclusion order
    Weights fused;
    double quality = 0.0;
};

/// Greedy soup: rank members by standalone quality, then add each in turn
/// if the uniform average including it does not lose quality (or strictly
/// gains, with keep_ties = false).
[[nodiscard]] GreedyResult fuse_greedy(const MemberSet& members, const QualityFn& quality, bool keep_ties = true);

struct LearnedConfig {
    int steps = 100;
    double lr = 0.1;
    double fd_step = 1e-4;
};

/// Projected finite-difference gradient descent on delta, starting from the
/// uniform average. `observer` sees every iterate, including the initial one.
[[nodiscard]] SimplexCoefficients
fuse_learned(const MemberSet& members, const LossFn& loss, const LearnedConfig& cfg = {},
             const std::function<void(const SimplexCoefficients&)>& observer = {});

// ---- checkpoint files ------------------------------------------------------

class CheckpointError : public Error {
public:
    enum class Kind { io, bad_magic, bad_header, dim_mismatch, truncated };
    CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    [[nodiscard]] Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct CheckpointMeta {
    std::int64_t id = 0;
    std::int64_t step = 0;
};

/// Payload at `path` (little-endian f64), sidecar header at `path + ".json"`.
/// Both are written atomically.
void save_checkpoint(const std::filesystem::path& path, std::span<const double> weights, const CheckpointMeta& meta);
[[nodiscard]] Member load_checkpoint(const std::filesystem::path& path);
[[nodiscard]] std::filesystem::path sidecar_path(const std::filesystem::path& payload);

/// Manifest: JSON index listing member payload paths (relative to the
/// manifest's directory) plus an optional task descriptor.
struct Manifest {
    std::vector<std::filesystem::path> payloads;
    std::string task_json;  // serialized object, empty if absent
};

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);
[[nodiscard]] Manifest read_manifest(const std::filesystem::path& path);
[[nodiscard]] MemberSet load_members(const std::filesystem::path& manifest_path);

/// Writes checkpoints `member_<id>.ckpt` plus `manifest.json` into `dir`.
std::filesystem::path write_member_dir(const std::filesystem::path& dir, const MemberSet& members,
                                       const std::string& task_json = {});

} // namespace bomf
