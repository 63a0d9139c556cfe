#include "bomf/pipeline.hpp"
#include "bomf/builtin.hpp"
#include "bomf/io.hpp"
#include "bomf/random.hpp"
#include "bomf/toybench.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace bomf {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Fits inside the loops are warm-started from the previous iteration, so a
// small multi-start budget suffices there.
constexpr int kPipelineGpRestarts = 2;
constexpr int kPipelineGpEvals = 200;

/// Scorer wrapper that remembers replies by coefficient vector. Baselines
/// revisit the same points (singletons, the final choice) often.
class MemoScorer {
public:
    explicit MemoScorer(Scorer& inner) : inner_(inner) {}

    EvalReply score(const std::vector<double>& delta) {
        if (auto it = cache_.find(delta); it != cache_.end()) return it->second;
        EvalReply r;
        try {
            r = inner_.score(delta);
        } catch (const EvaluationError& e) {
            r = EvalReply{};
            r.error = e.what();
        }
        cache_.emplace(delta, r);
        return r;
    }

private:
    Scorer& inner_;
    std::map<std::vector<double>, EvalReply> cache_;
};

std::vector<double> normalized_or_zero(const EvalReply& r, const ObjectiveSpec& spec) {
    std::vector<double> raw;
    for (const auto& e : spec.entries()) {
        const auto it = r.objectives.find(e.name);
        if (!r.ok || it == r.objectives.end() || !std::isfinite(it->second)) return std::vector<double>(spec.size(), 0.0);
        raw.push_back(it->second);
    }
    return spec.normalize_all(raw);
}

KindFilter quality_filter(const ObjectiveSpec& spec) {
    return spec.count(ObjectiveKind::metric) > 0 ? KindFilter::metrics : KindFilter::all;
}

MethodResult make_method(std::string name, std::vector<double> delta, const EvalReply& reply, const ObjectiveSpec& spec) {
    MethodResult m;
    m.name = std::move(name);
    m.delta = std::move(delta);
    m.ok = reply.ok;
    m.error = reply.error;
    m.objectives = reply.objectives;
    m.normalized = normalized_or_zero(reply, spec);
    return m;
}

} // namespace

// ---- fusion stage -----------------------------------------------------------------

FusionStageResult run_fusion_stage(std::size_t n_members, Scorer& scorer, const FusionStageConfig& cfg) {
    if (n_members == 0) throw InvalidArgument("run_fusion_stage: no members");
    if (cfg.objectives.empty()) throw InvalidArgument("run_fusion_stage: no objectives");
    const std::size_t n = n_members;
    MemoScorer memo(scorer);

    FusionStageResult res;
    std::vector<EvalReply> member_replies;
    for (std::size_t i = 0; i < n; ++i) {
        auto delta = SimplexCoefficients::one_hot(n, i).values();
        auto reply = memo.score(delta);
        if (!reply.ok) throw StageError("members", "member " + std::to_string(i) + " could not be scored: " + reply.error);
        member_replies.push_back(std::move(reply));
    }

    auto entries = cfg.objectives;
    if (cfg.derive_windows) {
        for (auto& e : entries) {
            std::vector<double> values;
            for (const auto& r : member_replies) {
                const auto it = r.objectives.find(e.name);
                if (it == r.objectives.end())
                    throw StageError("members", "scorer reply lacks objective '" + e.name + "'");
                values.push_back(it->second);
            }
            std::tie(e.norm_min, e.norm_max) = derive_norm_bounds(values, e.kind, e.direction);
        }
    }
    res.spec = ObjectiveSpec(entries);
    const auto& spec = res.spec;
    const auto filter = quality_filter(spec);

    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        Observation obs;
        obs.x = SimplexCoefficients::one_hot(n, i).values();
        obs.meta.seed = cfg.seed;
        obs.meta.eval_index = static_cast<std::int64_t>(i);
        for (const auto& e : spec.entries()) obs.raw.push_back(member_replies[i].objectives.at(e.name));
        obs.normalized = spec.normalize_all(obs.raw);
        const double q = scalarize_sum(obs.normalized, spec, filter);
        if (q > best_q) {
            best_q = q;
            res.best_member = i;
        }
        res.member_evals.push_back(std::move(obs));
    }

    const auto best_delta = SimplexCoefficients::one_hot(n, res.best_member).values();
    res.methods.push_back(make_method("best_member", best_delta, member_replies[res.best_member], spec));

    if (n == 1) {
        res.degenerate = true;
        for (const char* name : {"swa", "greedy", "learned", "bomf"}) {
            auto m = make_method(name, best_delta, member_replies[0], spec);
            if (std::string(name) == "greedy") m.subset = {0};
            res.methods.push_back(std::move(m));
        }
        return res;
    }

    if (cfg.baselines) {
        const auto uniform = SimplexCoefficients::uniform(n).values();
        res.methods.push_back(make_method("swa", uniform, memo.score(uniform), spec));

        // Members as unit vectors: fused weights are then the coefficients.
        std::vector<Member> virt;
        for (std::size_t i = 0; i < n; ++i)
            virt.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(i), SimplexCoefficients::one_hot(n, i).values()});
        const MemberSet unit_members(std::move(virt));

        const auto greedy = fuse_greedy(unit_members, [&](const Weights& d) {
            const auto r = memo.score(d);
            if (!r.ok) return -std::numeric_limits<double>::infinity();
            return scalarize_sum(normalized_or_zero(r, spec), spec, filter);
        });
        auto gm = make_method("greedy", greedy.fused, memo.score(greedy.fused), spec);
        gm.subset = greedy.subset;
        res.methods.push_back(std::move(gm));

        if (spec.count(ObjectiveKind::loss) == 1) {
            const auto loss_it = std::find_if(spec.entries().begin(), spec.entries().end(),
                                              [](const ObjectiveEntry& e) { return e.kind == ObjectiveKind::loss; });
            const auto& loss_entry = *loss_it;
            const double sign = loss_entry.direction == Direction::minimize ? 1.0 : -1.0;
            try {
                const auto learned = fuse_learned(unit_members, [&](const Weights& d) {
                    EvalReply r;
                    try {
                        r = scorer.score(d);
                    } catch (const EvaluationError&) {
                        return std::numeric_limits<double>::quiet_NaN();
                    }
                    const auto it = r.objectives.find(loss_entry.name);
                    if (!r.ok || it == r.objectives.end()) return std::numeric_limits<double>::quiet_NaN();
                    return sign * it->second;
                }, cfg.learned);
                res.methods.push_back(make_method("learned", learned.values(), memo.score(learned.values()), spec));
            } catch (const EvaluationError& e) {
                MethodResult m;
                m.name = "learned";
                m.ok = false;
                m.error = e.what();
                m.normalized.assign(spec.size(), 0.0);
                res.methods.push_back(std::move(m));
            }
        }
    }

    MoboConfig mcfg;
    mcfg.n_iter = cfg.iters_per_member * n;
    mcfg.seed = derive_seed(cfg.seed, 5);
    mcfg.gp = cfg.gp;
    mcfg.acq = cfg.acq;
    mcfg.best_member = res.best_member;
    res.mobo = run_mobo(n, scorer, spec, mcfg);
    const auto& star = res.mobo->delta_star.values();
    res.methods.push_back(make_method("bomf", star, memo.score(star), spec));
    return res;
}

const MethodResult& method(const FusionStageResult& r, const std::string& name) {
    for (const auto& m : r.methods)
        if (m.name == name) return m;
    throw InvalidArgument("no fusion method named '" + name + "'");
}

// ---- configuration ------------------------------------------------------------------

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw InvalidArgument("unknown key '" + key + "' in " + where);
    }
}

EvaluatorConfig parse_evaluator(const json& j, const std::string& where) {
    if (!j.is_object()) throw InvalidArgument(where + " must be an object");
    reject_unknown(j, {"builtin", "options", "cmd", "args", "timeout_s"}, where);
    EvaluatorConfig e;
    e.builtin = j.value("builtin", std::string{});
    e.command = j.value("cmd", std::string{});
    if (e.builtin.empty() == e.command.empty()) throw InvalidArgument(where + " needs exactly one of builtin, cmd");
    if (j.contains("options")) e.options_json = j["options"].dump();
    if (j.contains("args")) e.args = j["args"].get<std::vector<std::string>>();
    if (j.contains("timeout_s")) {
        const double s = j["timeout_s"].get<double>();
        if (!(s > 0.0)) throw InvalidArgument(where + ".timeout_s must be positive");
        e.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(s * 1000.0)));
    }
    return e;
}

} // namespace

PipelineConfig parse_pipeline_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    try {
        reject_unknown(j, {"space", "objectives", "budgets", "n_members", "seed", "trainer", "scorer", "proxy_trainer",
                           "gp", "acq", "learned"},
                       "config");
        PipelineConfig c;
        std::vector<ParamDim> dims;
        for (const auto& d : j.value("space", json::array())) {
            reject_unknown(d, {"name", "lower", "upper", "scale", "integer"}, "space entry");
            ParamDim p;
            p.name = d.at("name").get<std::string>();
            p.lower = d.at("lower").get<double>();
            p.upper = d.at("upper").get<double>();
            p.scale = parse_scale(d.value("scale", std::string("linear")));
            p.integer = d.value("integer", false);
            dims.push_back(std::move(p));
        }
        if (!dims.empty()) c.space = BoundedParamSpace(std::move(dims));

        for (const auto& o : j.at("objectives")) {
            reject_unknown(o, {"name", "kind", "direction", "window"}, "objective entry");
            ObjectiveEntry e;
            e.name = o.at("name").get<std::string>();
            e.kind = parse_kind(o.value("kind", std::string("metric")));
            e.direction = parse_direction(
                o.value("direction", std::string(e.kind == ObjectiveKind::loss ? "minimize" : "maximize")));
            if (o.contains("window")) {
                const auto w = o["window"].get<std::vector<double>>();
                if (w.size() != 2) throw InvalidArgument("objective window must have two entries");
                e.norm_min = w[0];
                e.norm_max = w[1];
            }
            c.objectives.push_back(std::move(e));
        }
        ObjectiveSpec(c.objectives).require_mobo_shape();

        if (j.contains("budgets")) {
            const auto& b = j["budgets"];
            reject_unknown(b, {"n_init", "hpbo_iters", "mobo_iters_per_member"}, "budgets");
            c.n_init = b.value("n_init", c.n_init);
            c.hpbo_iters = b.value("hpbo_iters", c.hpbo_iters);
            c.mobo_iters_per_member = b.value("mobo_iters_per_member", c.mobo_iters_per_member);
        }
        c.n_members = j.value("n_members", c.n_members);
        if (c.n_members == 0) throw InvalidArgument("n_members must be >= 1");
        c.seed = j.value("seed", c.seed);
        if (j.contains("trainer")) c.trainer = parse_evaluator(j["trainer"], "trainer");
        if (j.contains("scorer")) c.scorer = parse_evaluator(j["scorer"], "scorer");
        if (j.contains("proxy_trainer")) c.proxy_trainer = parse_evaluator(j["proxy_trainer"], "proxy_trainer");

        c.gp.restarts = kPipelineGpRestarts;
        c.gp.max_evals = kPipelineGpEvals;
        if (j.contains("gp")) {
            reject_unknown(j["gp"], {"restarts", "max_evals"}, "gp");
            c.gp.restarts = j["gp"].value("restarts", c.gp.restarts);
            c.gp.max_evals = j["gp"].value("max_evals", c.gp.max_evals);
        }
        if (j.contains("acq")) {
            const auto& a = j["acq"];
            reject_unknown(a, {"n_restarts", "n_raw_candidates", "n_mc", "local_steps"}, "acq");
            c.acq.n_restarts = a.value("n_restarts", c.acq.n_restarts);
            c.acq.n_raw_candidates = a.value("n_raw_candidates", c.acq.n_raw_candidates);
            c.acq.n_mc = a.value("n_mc", c.acq.n_mc);
            c.acq.local_steps = a.value("local_steps", c.acq.local_steps);
        }
        c.acq.validate();
        if (j.contains("learned")) {
            const auto& l = j["learned"];
            reject_unknown(l, {"steps", "lr", "fd_step"}, "learned");
            c.learned.steps = l.value("steps", c.learned.steps);
            c.learned.lr = l.value("lr", c.learned.lr);
            c.learned.fd_step = l.value("fd_step", c.learned.fd_step);
        }
        return c;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed config: ") + e.what());
    }
}

HpboConfig hpbo_config(const PipelineConfig& cfg) {
    HpboConfig h;
    h.n_init = cfg.n_init;
    h.n_iter = cfg.hpbo_iters;
    h.seed = derive_seed(cfg.seed, 1);
    h.gp = cfg.gp;
    h.acq = cfg.acq;
    return h;
}

FusionStageConfig fusion_config(const PipelineConfig& cfg) {
    FusionStageConfig f;
    f.objectives = cfg.objectives;
    f.iters_per_member = cfg.mobo_iters_per_member;
    f.seed = derive_seed(cfg.seed, 2);
    f.gp = cfg.gp;
    f.acq = cfg.acq;
    f.learned = cfg.learned;
    return f;
}

std::unique_ptr<Trainer> make_trainer(const EvaluatorConfig& cfg) {
    if (cfg.builtin.empty()) return std::make_unique<SubprocessEvaluator>(cfg.command, cfg.args, cfg.timeout);
    if (cfg.builtin == "toy") return std::make_unique<toy::ToyTrainer>(toy::parse_toy_trainer_options(cfg.options_json));
    throw InvalidArgument("unknown builtin trainer '" + cfg.builtin + "'");
}

std::unique_ptr<Scorer> make_scorer(const EvaluatorConfig& cfg, const fs::path& manifest) {
    if (cfg.builtin.empty()) {
        auto ev = std::make_unique<SubprocessEvaluator>(cfg.command, cfg.args, cfg.timeout);
        ev->set_manifest(fs::absolute(manifest).string());
        return ev;
    }
    const auto kind = toy::manifest_task_kind(manifest);
    if (kind != cfg.builtin)
        throw InvalidArgument("builtin scorer '" + cfg.builtin + "' does not match the manifest task '" + kind + "'");
    return toy::scorer_from_manifest(manifest);
}

// ---- end-to-end -----------------------------------------------------------------------

PipelineReport run_pipeline(const PipelineConfig& cfg, const fs::path& out_dir) {
    if (cfg.space.size() == 0) throw InvalidArgument("config has no space");
    if (!cfg.trainer) throw InvalidArgument("config has no trainer");
    if (!cfg.scorer) throw InvalidArgument("config has no scorer");
    fs::create_directories(out_dir);
    const auto members_dir = fs::absolute(out_dir / "members");
    PipelineReport rep;

    auto trainer = make_trainer(*cfg.trainer);
    std::unique_ptr<Trainer> proxy;
    if (cfg.proxy_trainer) proxy = make_trainer(*cfg.proxy_trainer);

    try {
        rep.hpbo = run_hpbo(cfg.space, proxy ? *proxy : *trainer, ObjectiveSpec(cfg.objectives), hpbo_config(cfg));
    } catch (const EvaluationError& e) {
        throw StageError("hpbo", e.what());
    }
    const auto params = named_params(cfg.space, rep.hpbo.best_lambda);

    EvalReply anchor = rep.hpbo.replies[rep.hpbo.best_index];
    if (proxy) {
        try {
            anchor = trainer->train({params, {}, {}});
        } catch (const EvaluationError& e) {
            throw StageError("retrain", e.what());
        }
        if (!anchor.ok) throw StageError("retrain", anchor.error);
    }
    const auto anchor_step = anchor.best_step ? anchor.best_step : anchor.convergence_step;
    if (!anchor_step) throw StageError("retrain", "trainer reported neither best_step nor convergence_step");
    if (!anchor.total_steps) throw StageError("retrain", "trainer did not report total_steps");
    rep.total_steps = *anchor.total_steps;
    rep.anchor_step = std::clamp<std::int64_t>(*anchor_step, 1, rep.total_steps);
    const auto schedule = collection_schedule(rep.total_steps, rep.anchor_step, cfg.n_members);
    rep.collect_steps = schedule.steps;
    rep.short_window = schedule.short_window;

    EvalReply collected;
    try {
        collected = trainer->train({params, schedule.steps, members_dir.string()});
    } catch (const EvaluationError& e) {
        throw StageError("collect", e.what());
    }
    if (!collected.ok) throw StageError("collect", collected.error);
    rep.manifest = collected.manifest ? fs::path(*collected.manifest) : members_dir / "manifest.json";
    if (!fs::exists(rep.manifest)) throw StageError("collect", "no member manifest at " + rep.manifest.string());
    const auto n = read_manifest(rep.manifest).payloads.size();
    if (n == 0) throw StageError("collect", "trainer stored no members");

    auto scorer = make_scorer(*cfg.scorer, rep.manifest);
    try {
        rep.fusion = run_fusion_stage(n, *scorer, fusion_config(cfg));
    } catch (const StageError&) {
        throw;
    } catch (const EvaluationError& e) {
        throw StageError("mobo", e.what());
    }

    const auto members = load_members(rep.manifest);
    save_checkpoint(out_dir / "fused.ckpt", fuse(members, SimplexCoefficients(method(rep.fusion, "bomf").delta)), {0, 0});
    write_file_atomic(out_dir / "history.csv", history_csv(&rep.hpbo, &rep.fusion));
    write_file_atomic(out_dir / "report.json", report_json(rep, cfg));
    return rep;
}

// ---- outputs -------------------------------------------------------------------------------

namespace {

void csv_row(std::ostringstream& os, const char* stage, const Observation& o, bool on_front) {
    os << stage << ',' << o.meta.eval_index << ',' << (o.failed ? 1 : 0) << ',' << join_doubles(o.x) << ','
       << join_doubles(o.raw) << ',' << join_doubles(o.normalized) << ',' << (on_front ? 1 : 0) << '\n';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json objectives_to_json(const std::map<std::string, double>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = finite_or_null(v);
    return j;
}

} // namespace

std::string history_csv(const HpboState* hpbo, const FusionStageResult* fusion) {
    std::ostringstream os;
    os << kHistoryCsvHeader << '\n';
    if (hpbo)
        for (std::size_t i = 0; i < hpbo->history.size(); ++i)
            csv_row(os, "hpbo", hpbo->history[i], i == hpbo->best_index);
    if (fusion) {
        for (std::size_t i = 0; i < fusion->member_evals.size(); ++i)
            csv_row(os, "members", fusion->member_evals[i], i == fusion->best_member);
        if (fusion->mobo) {
            const auto& ids = fusion->mobo->state.front.ids;
            const std::set<std::int64_t> on(ids.begin(), ids.end());
            for (const auto& o : fusion->mobo->state.history) csv_row(os, "mobo", o, on.count(o.meta.eval_index) > 0);
        }
    }
    return os.str();
}

std::string methods_json(const FusionStageResult& fusion) {
    json out = json::object();
    json windows = json::array();
    for (const auto& e : fusion.spec.entries())
        windows.push_back({{"name", e.name},
                           {"kind", to_string(e.kind)},
                           {"direction", to_string(e.direction)},
                           {"min", e.norm_min},
                           {"max", e.norm_max}});
    out["windows"] = windows;
    out["best_member"] = fusion.best_member;
    out["degenerate_fusion"] = fusion.degenerate;
    json methods = json::array();
    for (const auto& m : fusion.methods) {
        json jm = {{"name", m.name}, {"ok", m.ok}, {"delta", m.delta}, {"objectives", objectives_to_json(m.objectives)}};
        json norm = json::object();
        for (std::size_t k = 0; k < fusion.spec.size() && k < m.normalized.size(); ++k)
            norm[fusion.spec[k].name] = m.normalized[k];
        jm["normalized"] = norm;
        if (!m.subset.empty()) jm["subset"] = m.subset;
        if (!m.ok) jm["error"] = m.error;
        methods.push_back(std::move(jm));
    }
    out["methods"] = methods;
    if (fusion.mobo) {
        const auto& st = fusion.mobo->state;
        out["mobo"] = {{"evaluations", st.history.size()},
                       {"iterations", st.iteration},
                       {"front_ids", st.front.ids},
                       {"hypervolume", st.hv_trace.empty() ? 0.0 : st.hv_trace.back()}};
    }
    return out.dump();
}

std::string report_json(const PipelineReport& rep, const PipelineConfig& cfg) {
    json j;
    j["schema"] = 1;
    j["seed"] = cfg.seed;
    json lam = json::object();
    for (std::size_t i = 0; i < cfg.space.size(); ++i) lam[cfg.space[i].name] = rep.hpbo.best_lambda[i];
    std::size_t failed = 0;
    for (const auto& o : rep.hpbo.history) failed += o.failed ? 1 : 0;
    j["hpbo"] = {{"best_lambda", lam},
                 {"best_score", rep.hpbo.scores[rep.hpbo.best_index]},
                 {"evaluations", rep.hpbo.history.size()},
                 {"failed", failed},
                 {"proxy", cfg.proxy_trainer.has_value()}};
    j["trajectory"] = {{"anchor_step", rep.anchor_step},
                       {"total_steps", rep.total_steps},
                       {"collect_steps", rep.collect_steps},
                       {"short_window", rep.short_window},
                       {"manifest", rep.manifest.string()}};
    const auto fusion = json::parse(methods_json(rep.fusion));
    for (const auto& [k, v] : fusion.items()) j[k] = v;
    return j.dump(2) + "\n";
}

// ---- misalignment demo ------------------------------------------------------------------------

DemoResult run_misalign_demo(const DemoOptions& opts, std::uint64_t seed, const fs::path& out_dir) {
    toy::MisalignOptions mo;
    mo.dim = opts.dim;
    mo.offset = opts.offset;
    mo.ruggedness = opts.ruggedness;
    mo.members = opts.members;
    mo.spread = opts.spread;
    auto inst = toy::make_misaligned_landscape(mo, seed);

    DemoResult res;
    res.seed_used = inst.seed_used;
    res.certificate_best_member = inst.best_member_metric;
    res.certificate_uniform = inst.uniform_metric;
    res.certificate_best_mixture = inst.best_mixture_metric;

    toy::LandscapeScorer scorer(inst.landscape, inst.members);
    FusionStageConfig fcfg;
    fcfg.objectives = {{"loss", Direction::minimize, 0.0, 1.0, ObjectiveKind::loss},
                       {"metric", Direction::maximize, 0.0, 1.0, ObjectiveKind::metric}};
    fcfg.iters_per_member = opts.iters_per_member;
    fcfg.seed = derive_seed(seed, 3);
    fcfg.gp.restarts = kPipelineGpRestarts;
    fcfg.gp.max_evals = kPipelineGpEvals;
    res.fusion = run_fusion_stage(inst.members.size(), scorer, fcfg);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_member_dir(out_dir / "members", inst.members,
                         toy::landscape_descriptor(opts.dim, opts.offset, opts.ruggedness, inst.seed_used));
        std::ostringstream csv;
        csv << "method,loss,metric,delta\n";
        for (const auto& m : res.fusion.methods) {
            const auto get = [&](const char* k) {
                const auto it = m.objectives.find(k);
                return it == m.objectives.end() ? std::string("nan") : format_double(it->second);
            };
            csv << m.name << ',' << get("loss") << ',' << get("metric") << ',' << join_doubles(m.delta) << '\n';
        }
        write_file_atomic(out_dir / "comparison.csv", csv.str());
        auto j = json::parse(methods_json(res.fusion));
        j["schema"] = 1;
        j["seed"] = seed;
        j["certificate"] = {{"seed_used", inst.seed_used},
                            {"rejected_seeds", inst.rejected_seeds},
                            {"best_member_metric", inst.best_member_metric},
                            {"uniform_metric", inst.uniform_metric},
                            {"best_mixture_metric", inst.best_mixture_metric}};
        write_file_atomic(out_dir / "report.json", j.dump(2) + "\n");
        write_file_atomic(out_dir / "history.csv", history_csv(nullptr, &res.fusion));
    }
    return res;
}

} // namespace bomf
