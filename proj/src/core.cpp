#include "bomf/core.hpp"

#include "bomf/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bomf {

BoundedParamSpace::BoundedParamSpace(std::vector<ParamDim> dims) : dims_(std::move(dims)) {
    std::set<std::string> seen;
    for (const auto& d : dims_) {
        if (!(d.lower < d.upper))
            throw InvalidArgument("param '" + d.name + "': lower must be < upper");
        if (d.scale == Scale::log && !(d.lower > 0.0))
            throw InvalidArgument("param '" + d.name + "': log scale requires lower > 0");
        if (!seen.insert(d.name).second)
            throw InvalidArgument("duplicate param name '" + d.name + "'");
    }
}

std::vector<double> BoundedParamSpace::to_unit(std::span<const double> x) const {
    if (x.size() != dims_.size()) throw InvalidArgument("to_unit: dimension mismatch");
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& d = dims_[i];
        double t = d.scale == Scale::log
                       ? (std::log(x[i]) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower))
                       : (x[i] - d.lower) / (d.upper - d.lower);
        u[i] = std::clamp(t, 0.0, 1.0);
    }
    return u;
}

std::vector<double> BoundedParamSpace::from_unit(std::span<const double> u) const {
    if (u.size() != dims_.size()) throw InvalidArgument("from_unit: dimension mismatch");
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto& d = dims_[i];
        const double t = std::clamp(u[i], 0.0, 1.0);
        double v = d.scale == Scale::log
                       ? std::exp(std::log(d.lower) + t * (std::log(d.upper) - std::log(d.lower)))
                       : d.lower + t * (d.upper - d.lower);
        if (d.integer) v = std::round(v);
        x[i] = std::clamp(v, d.lower, d.upper);
    }
    return x;
}

bool BoundedParamSpace::contains(std::span<const double> x) const {
    if (x.size() != dims_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= dims_[i].lower && x[i] <= dims_[i].upper)) return false;
    return true;
}

ObjectiveSpec::ObjectiveSpec(std::vector<ObjectiveEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> seen;
    for (const auto& e : entries_) {
        if (!(e.norm_min < e.norm_max))
            throw InvalidArgument("objective '" + e.name + "': norm_min must be < norm_max");
        if (!seen.insert(e.name).second)
            throw InvalidArgument("duplicate objective name '" + e.name + "'");
    }
}

std::size_t ObjectiveSpec::count(ObjectiveKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [kind](const auto& e) { return e.kind == kind; }));
}

void ObjectiveSpec::require_mobo_shape() const {
    if (count(ObjectiveKind::loss) != 1)
        throw InvalidArgument("multi-objective fusion needs exactly one loss objective");
}

std::vector<double> ObjectiveSpec::normalize_all(std::span<const double> raw) const {
    if (raw.size() != entries_.size()) throw InvalidArgument("normalize_all: size mismatch");
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = normalize(raw[i], entries_[i]);
    return out;
}

double normalize(double raw, const ObjectiveEntry& entry) {
    if (!std::isfinite(raw))
        throw EvaluationError("objective '" + entry.name + "' returned a non-finite value");
    if (!(entry.norm_min < entry.norm_max))
        throw InvalidArgument("objective '" + entry.name + "': empty normalization window");
    const double width = entry.norm_max - entry.norm_min;
    const double v = entry.direction == Direction::maximize ? (raw - entry.norm_min) / width
                                                            : (entry.norm_max - raw) / width;
    return std::clamp(v, 0.0, 1.0);
}

double denormalize(double value, const ObjectiveEntry& entry) {
    const double width = entry.norm_max - entry.norm_min;
    return entry.direction == Direction::maximize ? entry.norm_min + value * width
                                                  : entry.norm_max - value * width;
}

namespace {

// One-decimal rounding; the epsilon absorbs representation error such as
// 0.7 * 10 == 7.000000000000001.
double floor_tenth(double v) { return std::floor(v * 10.0 + 1e-9) / 10.0; }

} // namespace

std::pair<double, double> derive_norm_bounds(std::span<const double> values, ObjectiveKind kind,
                                             Direction direction) {
    if (values.empty()) throw InvalidArgument("derive_norm_bounds: empty trajectory");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidArgument("derive_norm_bounds: non-finite value");
    const double width = kind == ObjectiveKind::metric ? 0.1 : 1.0;
    // The best value sits at the window's low end either way: rounding it
    // down keeps it inside, and the width extends toward worse values for
    // losses (normalize flips minimize entries).
    const double best = direction == Direction::maximize ? *std::max_element(values.begin(), values.end())
                                                         : *std::min_element(values.begin(), values.end());
    const double lo = floor_tenth(best);
    return {lo, lo + width};
}

double scalarize_sum(std::span<const double> normalized, const ObjectiveSpec& spec, KindFilter mask) {
    if (normalized.size() != spec.size()) throw InvalidArgument("scalarize_sum: size mismatch");
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        const auto kind = spec[i].kind;
        const bool take = mask == KindFilter::all || (mask == KindFilter::metrics && kind == ObjectiveKind::metric) ||
                          (mask == KindFilter::losses && kind == ObjectiveKind::loss);
        if (!take) continue;
        sum += normalized[i];
        ++used;
    }
    if (used == 0) throw InvalidArgument("scalarize_sum: mask selects no objective");
    return sum;
}

const char* to_string(Scale s) { return s == Scale::log ? "log" : "linear"; }
const char* to_string(Direction d) { return d == Direction::minimize ? "minimize" : "maximize"; }
const char* to_string(ObjectiveKind k) { return k == ObjectiveKind::loss ? "loss" : "metric"; }

Scale parse_scale(const std::string& s) {
    if (s == "linear") return Scale::linear;
    if (s == "log") return Scale::log;
    throw InvalidArgument("unknown scale '" + s + "'");
}

Direction parse_direction(const std::string& s) {
    if (s == "minimize") return Direction::minimize;
    if (s == "maximize") return Direction::maximize;
    throw InvalidArgument("unknown direction '" + s + "'");
}

ObjectiveKind parse_kind(const std::string& s) {
    if (s == "loss") return ObjectiveKind::loss;
    if (s == "metric") return ObjectiveKind::metric;
    throw InvalidArgument("unknown objective kind '" + s + "'");
}

} // namespace bomf
