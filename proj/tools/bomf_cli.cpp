#include "bomf/builtin.hpp"
#include "bomf/error.hpp"
#include "bomf/fusion.hpp"
#include "bomf/io.hpp"
#include "bomf/pareto.hpp"
#include "bomf/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitEvaluation = 2;
constexpr int kExitNumerical = 3;

constexpr const char* kFooter = R"(Exit codes: 0 success, 1 usage or bad input, 2 evaluation/protocol failure, 3 numerical failure.

history.csv columns (one row per evaluation):
  stage       hpbo | members | mobo
  eval_index  index within the stage, starting at 0
  failed      1 if the evaluator failed (placeholder values), else 0
  x           hyperparameters (hpbo) or fusion coefficients, ';'-separated
  raw         raw objectives in config order, ';'-separated (nan when failed)
  normalized  windowed objectives in [0,1], higher is better, ';'-separated
  on_front    hpbo: 1 for the chosen setting; members: 1 for the best member;
              mobo: 1 if on the final Pareto front

scan-surface columns: u,v followed by the task's objectives in name order,
for the point w1 + u (w2 - w1) + v (w3 - w1).)";

json load_json(const fs::path& p) {
    try {
        return json::parse(bomf::read_file(p));
    } catch (const json::exception& e) {
        throw bomf::InvalidArgument("cannot parse " + p.string() + ": " + e.what());
    }
}

std::vector<double> doubles_from(const json& j, const char* key, const fs::path& src) {
    const json& arr = j.is_object() ? j.value(key, json()) : j;
    if (!arr.is_array()) throw bomf::InvalidArgument(src.string() + ": expected an array or {\"" + key + "\": [...]}");
    return arr.get<std::vector<double>>();
}

bomf::PipelineConfig load_config(const fs::path& p, std::uint64_t seed) {
    auto cfg = bomf::parse_pipeline_config(bomf::read_file(p));
    cfg.seed = seed;
    return cfg;
}

std::string pretty(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void cmd_hpo(const fs::path& config, const fs::path& out, std::uint64_t seed) {
    const auto cfg = load_config(config, seed);
    if (cfg.space.size() == 0) throw bomf::InvalidArgument("config has no space");
    const auto& ev = cfg.proxy_trainer ? cfg.proxy_trainer : cfg.trainer;
    if (!ev) throw bomf::InvalidArgument("config has no trainer");
    auto trainer = bomf::make_trainer(*ev);
    const auto st = bomf::run_hpbo(cfg.space, *trainer, bomf::ObjectiveSpec(cfg.objectives), bomf::hpbo_config(cfg));
    fs::create_directories(out);
    bomf::write_file_atomic(out / "history.csv", bomf::history_csv(&st, nullptr));
    json lam = json::object();
    for (std::size_t i = 0; i < cfg.space.size(); ++i) lam[cfg.space[i].name] = st.best_lambda[i];
    const auto& r = st.replies[st.best_index];
    json j = {{"schema", 1}, {"best_lambda", lam}, {"score", st.scores[st.best_index]}, {"eval_index", st.best_index}};
    if (r.best_step) j["best_step"] = *r.best_step;
    if (r.convergence_step) j["convergence_step"] = *r.convergence_step;
    if (r.total_steps) j["total_steps"] = *r.total_steps;
    bomf::write_file_atomic(out / "best_lambda.json", j.dump(2) + "\n");
    std::cout << "best score " << pretty(st.scores[st.best_index]) << " after " << st.history.size() << " evaluations\n";
}

void cmd_mobo(const fs::path& manifest, const fs::path& config, const fs::path& out, std::uint64_t seed) {
    const auto cfg = load_config(config, seed);
    if (!cfg.scorer) throw bomf::InvalidArgument("config has no scorer");
    const auto members = bomf::load_members(manifest);
    auto scorer = bomf::make_scorer(*cfg.scorer, manifest);
    auto fcfg = bomf::fusion_config(cfg);
    fcfg.baselines = false;
    const auto res = bomf::run_fusion_stage(members.size(), *scorer, fcfg);
    const auto& star = bomf::method(res, "bomf").delta;

    fs::create_directories(out);
    bomf::write_file_atomic(out / "history.csv", bomf::history_csv(nullptr, &res));
    json front = {{"schema", 1}, {"objectives", json::array()}, {"points", json::array()}, {"ids", json::array()},
                  {"deltas", json::array()}};
    for (const auto& e : res.spec.entries()) front["objectives"].push_back(e.name);
    if (res.mobo) {
        const auto& st = res.mobo->state;
        for (std::size_t i = 0; i < st.front.size(); ++i) {
            front["points"].push_back(st.front.points[i]);
            front["ids"].push_back(st.front.ids[i]);
            front["deltas"].push_back(st.history[static_cast<std::size_t>(st.front.ids[i])].x);
        }
    }
    bomf::write_file_atomic(out / "front.json", front.dump(2) + "\n");
    bomf::write_file_atomic(out / "delta_star.json", json({{"schema", 1}, {"delta", star}}).dump(2) + "\n");
    bomf::save_checkpoint(out / "fused.ckpt", bomf::fuse(members, bomf::SimplexCoefficients(star)), {0, 0});
    std::cout << "delta* = [" << bomf::join_doubles(star) << "]\n";
}

void cmd_pipeline(const fs::path& config, const fs::path& out, std::uint64_t seed) {
    const auto cfg = load_config(config, seed);
    const auto rep = bomf::run_pipeline(cfg, out);
    for (const auto& m : rep.fusion.methods) {
        std::cout << m.name;
        for (std::size_t k = 0; k < rep.fusion.spec.size(); ++k) {
            const auto& name = rep.fusion.spec[k].name;
            const auto it = m.objectives.find(name);
            std::cout << ' ' << name << '=' << (it == m.objectives.end() ? std::string("nan") : pretty(it->second));
        }
        std::cout << '\n';
    }
    if (rep.fusion.degenerate) std::cout << "degenerate fusion: a single member was collected\n";
}

void cmd_fuse(const fs::path& manifest, const fs::path& delta_path, const fs::path& out) {
    const auto members = bomf::load_members(manifest);
    const auto delta = doubles_from(load_json(delta_path), "delta", delta_path);
    const auto w = bomf::fuse(members, bomf::SimplexCoefficients(delta));
    bomf::save_checkpoint(out, w, {0, 0});
}

void cmd_hv(const fs::path& points_path, std::uint64_t seed) {
    const auto j = load_json(points_path);
    const json& arr = j.is_object() ? j.value("points", json()) : j;
    if (!arr.is_array()) throw bomf::InvalidArgument(points_path.string() + ": expected an array of points");
    const auto pts = arr.get<std::vector<bomf::Point>>();
    const auto hv = bomf::hypervolume_detailed(pts, seed);
    if (hv.exact)
        std::cout << pretty(hv.value) << " exact\n";
    else
        std::cout << pretty(hv.value) << " mc stderr=" << pretty(hv.std_error) << '\n';
}

void cmd_demo(const bomf::DemoOptions& opts, const fs::path& out, std::uint64_t seed) {
    const auto res = bomf::run_misalign_demo(opts, seed, out);
    std::cout << "certified instance seed " << res.seed_used << ": best member " << pretty(res.certificate_best_member)
              << ", uniform " << pretty(res.certificate_uniform) << ", best mixture "
              << pretty(res.certificate_best_mixture) << '\n';
    for (const auto& m : res.fusion.methods)
        std::cout << m.name << " loss=" << pretty(m.objectives.at("loss")) << " metric=" << pretty(m.objectives.at("metric"))
                  << '\n';
}

void cmd_scan(const fs::path& manifest, int resolution, const std::vector<std::size_t>& picks, const fs::path& out) {
    if (resolution < 2) throw bomf::InvalidArgument("--resolution must be >= 2");
    const auto members = bomf::load_members(manifest);
    if (members.size() < 3) throw bomf::InvalidArgument("scan-surface needs at least three members");
    std::vector<std::size_t> idx = picks;
    if (idx.empty()) idx = {0, members.size() / 2, members.size() - 1};
    if (idx.size() != 3) throw bomf::InvalidArgument("--members-at takes three indices");
    for (auto i : idx)
        if (i >= members.size()) throw bomf::InvalidArgument("member index out of range");
    auto scorer = bomf::toy::scorer_from_manifest(manifest);

    std::ostringstream csv;
    std::vector<std::string> names;
    for (int a = 0; a < resolution; ++a) {
        for (int b = 0; b < resolution; ++b) {
            const double u = -0.5 + 2.0 * a / (resolution - 1);
            const double v = -0.5 + 2.0 * b / (resolution - 1);
            std::vector<double> delta(members.size(), 0.0);
            delta[idx[0]] += 1.0 - u - v;
            delta[idx[1]] += u;
            delta[idx[2]] += v;
            const auto r = scorer->score(delta);
            if (!r.ok) throw bomf::EvaluationError(r.error);
            if (names.empty()) {
                csv << "u,v";
                for (const auto& [k, _] : r.objectives) {
                    names.push_back(k);
                    csv << ',' << k;
                }
                csv << '\n';
            }
            csv << bomf::format_double(u) << ',' << bomf::format_double(v);
            for (const auto& k : names) csv << ',' << bomf::format_double(r.objectives.at(k));
            csv << '\n';
        }
    }
    bomf::write_file_atomic(out, csv.str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bomf: two-stage Bayesian optimization for hyperparameters and checkpoint fusion"};
    app.footer(kFooter);
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    fs::path config, out, manifest, delta, points;
    int resolution = 41;
    std::vector<std::size_t> picks;
    bomf::DemoOptions demo;

    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "random seed")->required(); };

    auto* hpo = app.add_subcommand("hpo", "stage 1 only: writes history.csv and best_lambda.json");
    hpo->add_option("--config", config, "config JSON")->required()->check(CLI::ExistingFile);
    hpo->add_option("--out", out, "output directory")->required();
    add_seed(hpo);

    auto* mobo = app.add_subcommand("mobo", "stage 2 only: writes history.csv, front.json, delta_star.json, fused.ckpt");
    mobo->add_option("--members", manifest, "member manifest")->required()->check(CLI::ExistingFile);
    mobo->add_option("--config", config, "config JSON")->required()->check(CLI::ExistingFile);
    mobo->add_option("--out", out, "output directory")->required();
    add_seed(mobo);

    auto* pipe = app.add_subcommand("pipeline", "both stages plus baselines: writes report.json and history.csv");
    pipe->add_option("--config", config, "config JSON")->required()->check(CLI::ExistingFile);
    pipe->add_option("--out", out, "output directory")->required();
    add_seed(pipe);

    auto* fuse = app.add_subcommand("fuse", "fuse members with given coefficients into one checkpoint");
    fuse->add_option("--members", manifest, "member manifest")->required()->check(CLI::ExistingFile);
    fuse->add_option("--delta", delta, "JSON array of coefficients")->required()->check(CLI::ExistingFile);
    fuse->add_option("--out", out, "output checkpoint")->required();
    add_seed(fuse);

    auto* hv = app.add_subcommand("hv", "hypervolume of points against the origin");
    hv->add_option("--points", points, "JSON array of points")->required()->check(CLI::ExistingFile);
    add_seed(hv);

    auto* dm = app.add_subcommand("demo-misalign", "certified misaligned landscape, all fusion methods compared");
    dm->add_option("--out", out, "output directory")->required();
    dm->add_option("--dim", demo.dim, "weight dimension");
    dm->add_option("--offset", demo.offset, "distance between loss and metric optima");
    dm->add_option("--ruggedness", demo.ruggedness, "metric ruggedness");
    dm->add_option("--members", demo.members, "number of members");
    dm->add_option("--spread", demo.spread, "member distance from the loss optimum");
    add_seed(dm);

    auto* scan = app.add_subcommand("scan-surface", "objective values on the plane through three members");
    scan->add_option("--members", manifest, "member manifest")->required()->check(CLI::ExistingFile);
    scan->add_option("--resolution", resolution, "grid points per axis over [-0.5, 1.5]");
    scan->add_option("--members-at", picks, "three member indices (default first, middle, last)")->expected(3);
    scan->add_option("--out", out, "output CSV")->required();
    add_seed(scan);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*hpo) cmd_hpo(config, out, seed);
        else if (*mobo) cmd_mobo(manifest, config, out, seed);
        else if (*pipe) cmd_pipeline(config, out, seed);
        else if (*fuse) cmd_fuse(manifest, delta, out);
        else if (*hv) cmd_hv(points, seed);
        else if (*dm) cmd_demo(demo, out, seed);
        else if (*scan) cmd_scan(manifest, resolution, picks, out);
    } catch (const bomf::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const bomf::EvaluationError& e) {
        std::cerr << "evaluation failure: " << e.what() << '\n';
        return kExitEvaluation;
    } catch (const bomf::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}
