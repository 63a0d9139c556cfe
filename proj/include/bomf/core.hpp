#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bomf {

enum class Scale { linear, log };
enum class Direction { minimize, maximize };
enum class ObjectiveKind { loss, metric };

/// One hyperparameter axis.
struct ParamDim {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    Scale scale = Scale::linear;
    bool integer = false;
};

/// Axis-aligned box of hyperparameters. The BO loops work in the unit cube;
/// `to_unit`/`from_unit` map between the two (log axes are mapped in log
/// space, integer axes are rounded on the way out).
class BoundedParamSpace {
public:
    BoundedParamSpace() = default;
    explicit BoundedParamSpace(std::vector<ParamDim> dims);

    [[nodiscard]] std::size_t size() const { return dims_.size(); }
    [[nodiscard]] const std::vector<ParamDim>& dims() const { return dims_; }
    [[nodiscard]] const ParamDim& operator[](std::size_t i) const { return dims_[i]; }

    [[nodiscard]] std::vector<double> to_unit(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> from_unit(std::span<const double> u) const;
    [[nodiscard]] bool contains(std::span<const double> x) const;

private:
    std::vector<ParamDim> dims_;
};

struct ObjectiveEntry {
    std::string name;
    Direction direction = Direction::maximize;
    double norm_min = 0.0;
    double norm_max = 1.0;
    ObjectiveKind kind = ObjectiveKind::metric;
};

/// Ordered objective list with min-max windows.
class ObjectiveSpec {
public:
    ObjectiveSpec() = default;
    explicit ObjectiveSpec(std::vector<ObjectiveEntry> entries);

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const std::vector<ObjectiveEntry>& entries() const { return entries_; }
    [[nodiscard]] const ObjectiveEntry& operator[](std::size_t i) const { return entries_[i]; }
    [[nodiscard]] std::size_t count(ObjectiveKind kind) const;

    /// Throws InvalidArgument unless exactly one loss entry is present.
    void require_mobo_shape() const;

    /// Normalizes a full raw vector (one value per entry).
    [[nodiscard]] std::vector<double> normalize_all(std::span<const double> raw) const;

private:
    std::vector<ObjectiveEntry> entries_;
};

struct EvalMeta {
    std::uint64_t seed = 0;
    std::int64_t eval_index = 0;
    std::int64_t wall_ms = 0;
};

/// One evaluated point. Failed evaluations carry all-zero normalized values.
struct Observation {
    std::vector<double> x;
    std::vector<double> raw;
    std::vector<double> normalized;
    EvalMeta meta;
    bool failed = false;
};

/// Selects which entries of an ObjectiveSpec participate in a sum.
enum class KindFilter { all, metrics, losses };

/// Min-max map of `raw` into [0,1] with higher-is-better orientation.
/// Throws EvaluationError on a non-finite raw value.
[[nodiscard]] double normalize(double raw, const ObjectiveEntry& entry);

/// Inverse of normalize inside the window (no clipping applied).
[[nodiscard]] double denormalize(double value, const ObjectiveEntry& entry);

/// Normalization window from the values a trajectory's members achieved.
/// The window starts at the best value rounded down to one decimal and is
/// 0.1 wide for metrics, 1.0 wide for losses.
[[nodiscard]] std::pair<double, double>
derive_norm_bounds(std::span<const double> trajectory_values, ObjectiveKind kind,
                   Direction direction);

[[nodiscard]] double scalarize_sum(std::span<const double> normalized,
                                   const ObjectiveSpec& spec, KindFilter mask);

[[nodiscard]] const char* to_string(Scale s);
[[nodiscard]] const char* to_string(Direction d);
[[nodiscard]] const char* to_string(ObjectiveKind k);
[[nodiscard]] Scale parse_scale(const std::string& s);
[[nodiscard]] Direction parse_direction(const std::string& s);
[[nodiscard]] ObjectiveKind parse_kind(const std::string& s);

} // namespace bomf
