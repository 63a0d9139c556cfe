#include "bomf/builtin.hpp"
#include "bomf/error.hpp"
#include "bomf/evaluator.hpp"
#include "bomf/pipeline.hpp"
#include "scratch.hpp"

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <cmath>

using namespace bomf;
using namespace std::chrono_literals;

namespace {

const std::string kToy = TOY_EVALUATOR_PATH;

SubprocessEvaluator toy_eval(std::vector<std::string> args, std::chrono::milliseconds timeout = 20s) {
    return SubprocessEvaluator(kToy, std::move(args), timeout);
}

TrainRequest lr_request(double lr) { return {{{"lr", lr}, {"steps", 60}}, {}, {}}; }

} // namespace

TEST_SUITE("evaluator") {

TEST_CASE("request encoding") {
    const auto t = nlohmann::json::parse(encode_trainer_request(3, {{{"lr", 0.1}}, {5, 9}, "/tmp/m"}));
    CHECK(t["id"] == 3);
    CHECK(t["role"] == "trainer");
    CHECK(t["params"]["lr"] == 0.1);
    CHECK(t["collect_steps"] == nlohmann::json::array({5, 9}));
    CHECK(t["member_dir"] == "/tmp/m");
    CHECK_FALSE(nlohmann::json::parse(encode_trainer_request(1, {{{"lr", 0.1}}, {}, {}})).contains("collect_steps"));

    const std::vector<double> d{0.25, 0.75};
    const auto s = nlohmann::json::parse(encode_scorer_request(4, d, "m.json"));
    CHECK(s["role"] == "scorer");
    CHECK(s["delta"][1] == 0.75);
    CHECK(s["manifest"] == "m.json");
}

TEST_CASE("reply decoding") {
    EvalReply r;
    r.ok = true;
    r.objectives = {{"f1", 0.5}, {"loss", 1.25}};
    r.convergence_step = 40;
    r.best_step = 55;
    r.total_steps = 100;
    const auto back = decode_reply(encode_reply(7, r), 7);
    CHECK(back.ok);
    CHECK(back.objectives == r.objectives);
    CHECK(back.best_step == 55);
    CHECK(back.total_steps == 100);

    const auto f = decode_reply(R"({"id": 2, "ok": false, "error": "diverged"})", 2);
    CHECK_FALSE(f.ok);
    CHECK(f.error == "diverged");

    CHECK(std::isnan(decode_reply(R"({"id": 1, "ok": true, "objectives": {"m": null}})", 1).objectives.at("m")));

    CHECK_THROWS_AS((void)decode_reply(R"({"id": 1, "ok": tru)", 1), ProtocolError);
    CHECK_THROWS_AS((void)decode_reply(R"({"ok": true, "objectives": {}})", 1), ProtocolError);
    CHECK_THROWS_AS((void)decode_reply(R"({"id": 2, "ok": true, "objectives": {}})", 1), ProtocolError);
    CHECK_THROWS_AS((void)decode_reply(R"({"id": 1, "objectives": {}})", 1), ProtocolError);
    CHECK_THROWS_AS((void)decode_reply(R"({"id": 1, "ok": true})", 1), ProtocolError);
    CHECK_THROWS_AS((void)decode_reply(R"({"id": 1, "ok": true, "objectives": {"m": "x"}})", 1), ProtocolError);
    CHECK_THROWS_AS((void)decode_reply("[1]", 1), ProtocolError);
}

TEST_CASE("echo evaluator feeds the history") {
    auto ev = toy_eval({"--echo", R"({"m": 0.5})"});
    const BoundedParamSpace space({{"x", 0.0, 1.0, Scale::linear, false}});
    const ObjectiveSpec spec({{"m", Direction::maximize, 0.0, 1.0, ObjectiveKind::metric}});
    HpboConfig cfg;
    cfg.n_iter = 1;
    cfg.gp.restarts = 1;
    const auto st = run_hpbo(space, ev, spec, cfg);
    REQUIRE(st.history.size() == 4);
    for (const auto& h : st.history) {
        CHECK_FALSE(h.failed);
        CHECK(h.raw[0] == 0.5);
    }
}

TEST_CASE("subprocess trainer matches the in-process trainer") {
    auto ev = toy_eval({"--task-seed", "7", "--train-seed", "3"});
    toy::ToyTrainerOptions opts;
    opts.task.seed = 7;
    opts.train_seed = 3;
    toy::ToyTrainer local(opts);
    for (double lr : {0.01, 0.3}) {
        const auto a = ev.train(lr_request(lr));
        const auto b = local.train(lr_request(lr));
        REQUIRE(a.ok);
        CHECK(a.objectives == b.objectives);
        CHECK(a.best_step == b.best_step);
        CHECK(a.convergence_step == b.convergence_step);
        CHECK(a.total_steps == 60);
    }
    const auto bad = ev.train({{{"momentum", 0.9}}, {}, {}});
    CHECK_FALSE(bad.ok);
    CHECK(bad.error.find("momentum") != std::string::npos);
}

TEST_CASE("subprocess scorer reads the manifest") {
    ScratchDir dir("scorer");
    const auto land = toy::make_landscape(4, 1.0, 0.5, 3);
    const auto members = toy::sample_members_near_loss_optimum(land, 3, 0.8, 3);
    const auto manifest = write_member_dir(dir.path(), members, toy::landscape_descriptor(4, 1.0, 0.5, 3));
    auto ev = toy_eval({});
    ev.set_manifest(manifest.string());
    toy::LandscapeScorer local(land, members);
    const std::vector<double> d{0.2, 0.5, 0.3};
    const auto a = ev.score(d);
    REQUIRE(a.ok);
    CHECK(a.objectives == local.score(d).objectives);
}

TEST_CASE("mismatched reply id") {
    auto ev = toy_eval({"--fault", "bad-id", "--fault-at", "2"});
    CHECK(ev.train(lr_request(0.1)).ok);
    CHECK_THROWS_AS((void)ev.train(lr_request(0.1)), ProtocolError);
    CHECK(ev.train(lr_request(0.1)).ok);
}

TEST_CASE("malformed reply") {
    auto ev = toy_eval({"--fault", "malformed", "--fault-at", "1"});
    CHECK_THROWS_AS((void)ev.train(lr_request(0.1)), ProtocolError);
    CHECK(ev.train(lr_request(0.1)).ok);
}

TEST_CASE("evaluator-reported failure") {
    auto ev = toy_eval({"--fault", "fail", "--fault-at", "1"});
    const auto r = ev.train(lr_request(0.1));
    CHECK_FALSE(r.ok);
    CHECK(r.error == "diverged");
}

TEST_CASE("timeout kills the child and the next call respawns it") {
    auto ev = toy_eval({"--fault", "timeout", "--fault-at", "1"}, 300ms);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        (void)ev.train(lr_request(0.1));
        FAIL("expected a timeout");
    } catch (const ProtocolError&) {
        FAIL("timeout reported as a protocol error");
    } catch (const EvaluationError& e) {
        CHECK(std::string(e.what()).find("timed out") != std::string::npos);
    }
    CHECK(std::chrono::steady_clock::now() - t0 < 5s);
    // Fresh child: request count restarts, so the first request faults again.
    CHECK_THROWS_AS((void)ev.train(lr_request(0.1)), EvaluationError);
}

TEST_CASE("faults inside the search loop become failed evaluations") {
    const BoundedParamSpace space({{"lr", 0.001, 1.0, Scale::log, false}});
    const ObjectiveSpec spec({{"f1", Direction::maximize, 0.0, 1.0, ObjectiveKind::metric}});
    HpboConfig cfg;
    cfg.n_iter = 3;
    cfg.gp.restarts = 1;
    for (const char* fault : {"bad-id", "fail", "malformed", "timeout"}) {
        CAPTURE(fault);
        auto ev = toy_eval({"--fault", fault, "--fault-at", "2", "--steps", "40"}, 1s);
        const auto st = run_hpbo(space, ev, spec, cfg);
        REQUIRE(st.history.size() == 6);
        CHECK(st.history[1].failed);
        CHECK_FALSE(st.history[0].failed);
        CHECK_FALSE(st.history[st.best_index].failed);
    }
}

TEST_CASE("missing executable") {
    SubprocessEvaluator ev("/nonexistent/evaluator", {}, 1s);
    CHECK_THROWS_AS((void)ev.train(lr_request(0.1)), EvaluationError);
    CHECK_THROWS_AS(SubprocessEvaluator("", {}), InvalidArgument);
}

}
