// Reference black-box evaluator: serves the toy classifier (trainer role)
// and manifest-described tasks (scorer role) over the line protocol.
// Fault flags reproduce each failure the driver has to survive.

#include "bomf/builtin.hpp"
#include "bomf/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <thread>

namespace {

using json = nlohmann::json;

struct Faults {
    std::string kind = "none";  // none, bad-id, timeout, fail, malformed
    long at = 0;                // 1-based request number; 0 = every request
    bool fires(long n) const { return kind != "none" && (at == 0 || at == n); }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"toy_evaluator: line-protocol evaluator for the bomf driver"};
    bomf::toy::ToyTrainerOptions opts;
    std::string echo;
    Faults faults;
    app.add_option("--task-seed", opts.task.seed, "seed of the synthetic dataset");
    app.add_option("--dim", opts.task.dim, "feature dimension");
    app.add_option("--n-train", opts.task.n_train, "training examples");
    app.add_option("--separation", opts.task.separation, "distance between class means");
    app.add_option("--train-seed", opts.train_seed, "mini-batch seed");
    app.add_option("--train-fraction", opts.train_fraction, "fraction of the training split (proxy runs)")
        ->check(CLI::Range(1e-9, 1.0));
    app.add_option("--steps", opts.defaults.steps, "default number of updates");
    app.add_option("--echo", echo, "reply with this fixed objectives object instead of evaluating");
    app.add_option("--fault", faults.kind, "inject a fault")
        ->check(CLI::IsMember({"none", "bad-id", "timeout", "fail", "malformed"}));
    app.add_option("--fault-at", faults.at, "request number that faults (0 = all)");
    CLI11_PARSE(app, argc, argv);

    std::unique_ptr<bomf::toy::ToyTrainer> trainer;
    std::map<std::string, std::unique_ptr<bomf::Scorer>> scorers;
    json echo_objectives;
    if (!echo.empty()) echo_objectives = json::parse(echo);

    std::string line;
    long count = 0;
    while (std::getline(std::cin, line)) {
        ++count;
        json req;
        std::int64_t id = 0;
        bomf::EvalReply reply;
        try {
            req = json::parse(line);
            id = req.at("id").get<std::int64_t>();
            const auto role = req.at("role").get<std::string>();
            if (!echo.empty()) {
                reply.ok = true;
                for (const auto& [k, v] : echo_objectives.items()) reply.objectives[k] = v.get<double>();
            } else if (role == "trainer") {
                if (!trainer) trainer = std::make_unique<bomf::toy::ToyTrainer>(opts);
                bomf::TrainRequest tr;
                tr.params = req.at("params").get<std::map<std::string, double>>();
                if (req.contains("collect_steps")) tr.collect_steps = req["collect_steps"].get<std::vector<std::int64_t>>();
                tr.member_dir = req.value("member_dir", std::string{});
                reply = trainer->train(tr);
            } else if (role == "scorer") {
                const auto manifest = req.at("manifest").get<std::string>();
                auto& sc = scorers[manifest];
                if (!sc) sc = bomf::toy::scorer_from_manifest(manifest);
                const auto delta = req.at("delta").get<std::vector<double>>();
                reply = sc->score(delta);
            } else {
                reply.error = "unknown role '" + role + "'";
            }
        } catch (const std::exception& e) {
            reply = bomf::EvalReply{};
            reply.error = e.what();
        }

        if (faults.fires(count)) {
            if (faults.kind == "timeout") {
                std::this_thread::sleep_for(std::chrono::hours(1));
            } else if (faults.kind == "malformed") {
                std::cout << "{\"id\": " << id << ", \"ok\": tru" << std::endl;
                continue;
            } else if (faults.kind == "bad-id") {
                id += 1000;
            } else if (faults.kind == "fail") {
                reply = bomf::EvalReply{};
                reply.error = "diverged";
            }
        }
        std::cout << bomf::encode_reply(id, reply) << std::endl;
    }
    return 0;
}
