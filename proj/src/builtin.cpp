#include "bomf/builtin.hpp"
#include "bomf/error.hpp"

#include <json.hpp>

#include <cmath>

namespace bomf::toy {

using json = nlohmann::json;

namespace {

ToyTaskConfig task_from_json(const json& j) {
    ToyTaskConfig c;
    c.dim = j.value("dim", c.dim);
    c.n_train = j.value("n_train", c.n_train);
    c.n_val = j.value("n_val", c.n_val);
    c.n_test = j.value("n_test", c.n_test);
    c.positive_rate = j.value("positive_rate", c.positive_rate);
    c.separation = j.value("separation", c.separation);
    c.seed = j.value("seed", c.seed);
    return c;
}

json parse_object(const std::string& text, const char* what) {
    try {
        auto j = text.empty() ? json::object() : json::parse(text);
        if (!j.is_object()) throw InvalidArgument(std::string(what) + " must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bad ") + what + ": " + e.what());
    }
}

EvalReply failure(std::string why) {
    EvalReply r;
    r.ok = false;
    r.error = std::move(why);
    return r;
}

} // namespace

Weights combine(const MemberSet& members, std::span<const double> delta) {
    if (delta.size() != members.size()) throw InvalidArgument("delta length differs from member count");
    Weights w(members.dim(), 0.0);
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) w[j] += delta[i] * members[i].weights[j];
    return w;
}

std::string toy_task_descriptor(const ToyTaskConfig& c) {
    const json j = {{"kind", "toy"},           {"dim", c.dim},
                    {"n_train", c.n_train},    {"n_val", c.n_val},
                    {"n_test", c.n_test},      {"positive_rate", c.positive_rate},
                    {"separation", c.separation}, {"seed", c.seed}};
    return j.dump();
}

std::string landscape_descriptor(std::size_t dim, double offset, double ruggedness, std::uint64_t seed) {
    const json j = {{"kind", "landscape"}, {"dim", dim}, {"offset", offset}, {"ruggedness", ruggedness}, {"seed", seed}};
    return j.dump();
}

ToyTrainerOptions parse_toy_trainer_options(const std::string& text) {
    const auto j = parse_object(text, "toy trainer options");
    ToyTrainerOptions o;
    o.task = task_from_json(j.value("task", json::object()));
    o.train_seed = j.value("train_seed", o.train_seed);
    o.train_fraction = j.value("train_fraction", o.train_fraction);
    o.defaults.lr = j.value("lr", o.defaults.lr);
    o.defaults.batch_size = j.value("batch_size", o.defaults.batch_size);
    o.defaults.steps = j.value("steps", o.defaults.steps);
    o.defaults.weight_decay = j.value("weight_decay", o.defaults.weight_decay);
    if (!(o.train_fraction > 0.0 && o.train_fraction <= 1.0))
        throw InvalidArgument("train_fraction must be in (0, 1]");
    return o;
}

// ---- trainer -------------------------------------------------------------------

ToyTrainer::ToyTrainer(ToyTrainerOptions opts) : opts_(std::move(opts)), task_(make_toy_task(opts_.task)) {
    if (opts_.train_fraction < 1.0) {
        const auto keep = std::max<Eigen::Index>(
            1, static_cast<Eigen::Index>(std::llround(opts_.train_fraction * static_cast<double>(task_.train.X.rows()))));
        task_.train.X.conservativeResize(keep, Eigen::NoChange);
        task_.train.y.resize(static_cast<std::size_t>(keep));
    }
}

EvalReply ToyTrainer::train(const TrainRequest& request) {
    ToyLambda lam = opts_.defaults;
    for (const auto& [name, v] : request.params) {
        if (!std::isfinite(v)) return failure("hyperparameter '" + name + "' is not finite");
        if (name == "lr") lam.lr = v;
        else if (name == "batch_size") lam.batch_size = static_cast<std::size_t>(std::max(1.0, std::round(v)));
        else if (name == "steps") lam.steps = static_cast<std::size_t>(std::max(1.0, std::round(v)));
        else if (name == "weight_decay") lam.weight_decay = v;
        else return failure("unknown hyperparameter '" + name + "'");
    }
    const auto result = train_toy(task_, lam, opts_.train_seed, request.collect_steps);
    if (result.failed) return failure(result.failure);

    EvalReply r;
    r.ok = true;
    r.objectives["f1"] = result.per_step[result.best_step].val_f1;
    r.objectives["loss"] = result.per_step[result.best_step].val_loss;
    r.convergence_step = static_cast<std::int64_t>(result.convergence_step);
    r.best_step = static_cast<std::int64_t>(result.best_step);
    r.total_steps = static_cast<std::int64_t>(lam.steps);
    if (!request.member_dir.empty() && !result.checkpoints.empty()) {
        const auto path = write_member_dir(request.member_dir, MemberSet(result.checkpoints),
                                           toy_task_descriptor(opts_.task));
        r.manifest = path.string();
    }
    return r;
}

// ---- scorers -------------------------------------------------------------------

ToyScorer::ToyScorer(ToyTask task, MemberSet members) : task_(std::move(task)), members_(std::move(members)) {
    if (members_.dim() != task_.config.dim + 1) throw InvalidArgument("toy scorer: member dimension does not match task");
}

EvalReply ToyScorer::score(std::span<const double> delta) {
    if (delta.size() != members_.size()) return failure("delta length differs from member count");
    const auto w = combine(members_, delta);
    EvalReply r;
    r.ok = true;
    r.objectives["f1"] = f1_on(w, task_.val);
    r.objectives["loss"] = logistic_loss(w, task_.val);
    r.objectives["heldout_f1"] = f1_on(w, task_.test);
    r.objectives["heldout_loss"] = logistic_loss(w, task_.test);
    return r;
}

LandscapeScorer::LandscapeScorer(SyntheticLandscape land, MemberSet members)
    : land_(std::move(land)), members_(std::move(members)) {
    if (members_.dim() != land_.dim) throw InvalidArgument("landscape scorer: member dimension does not match");
}

EvalReply LandscapeScorer::score(std::span<const double> delta) {
    if (delta.size() != members_.size()) return failure("delta length differs from member count");
    const auto w = combine(members_, delta);
    EvalReply r;
    r.ok = true;
    r.objectives["loss"] = land_.loss(w);
    r.objectives["metric"] = land_.metric(w);
    return r;
}

std::string manifest_task_kind(const std::filesystem::path& manifest) {
    const auto m = read_manifest(manifest);
    if (m.task_json.empty()) return {};
    return json::parse(m.task_json).value("kind", std::string{});
}

std::unique_ptr<Scorer> scorer_from_manifest(const std::filesystem::path& manifest) {
    const auto m = read_manifest(manifest);
    if (m.task_json.empty()) throw InvalidArgument("manifest " + manifest.string() + " carries no task descriptor");
    const auto task = json::parse(m.task_json);
    auto members = load_members(manifest);
    const auto kind = task.value("kind", std::string{});
    if (kind == "toy") return std::make_unique<ToyScorer>(make_toy_task(task_from_json(task)), std::move(members));
    if (kind == "landscape") {
        auto land = make_landscape(task.at("dim").get<std::size_t>(), task.at("offset").get<double>(),
                                   task.at("ruggedness").get<double>(), task.at("seed").get<std::uint64_t>());
        return std::make_unique<LandscapeScorer>(std::move(land), std::move(members));
    }
    throw InvalidArgument("unknown task kind '" + kind + "' in " + manifest.string());
}

} // namespace bomf::toy
