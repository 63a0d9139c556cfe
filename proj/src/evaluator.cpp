#include "bomf/evaluator.hpp"
#include "bomf/error.hpp"

#include <json.hpp>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <limits>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace bomf {

using json = nlohmann::json;

std::string encode_trainer_request(std::int64_t id, const TrainRequest& req) {
    json j = {{"id", id}, {"role", "trainer"}, {"params", req.params}};
    if (!req.collect_steps.empty()) j["collect_steps"] = req.collect_steps;
    if (!req.member_dir.empty()) j["member_dir"] = req.member_dir;
    return j.dump();
}

std::string encode_scorer_request(std::int64_t id, std::span<const double> delta, const std::string& manifest) {
    json j = {{"id", id}, {"role", "scorer"}, {"delta", std::vector<double>(delta.begin(), delta.end())}};
    if (!manifest.empty()) j["manifest"] = manifest;
    return j.dump();
}

namespace {

std::optional<std::int64_t> optional_int(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number_integer()) throw ProtocolError(std::string("reply field '") + key + "' is not an integer");
    return j[key].get<std::int64_t>();
}

} // namespace

EvalReply decode_reply(const std::string& line, std::int64_t expected_id) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed reply: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("reply is not a JSON object");
    if (!j.contains("id") || !j["id"].is_number_integer()) throw ProtocolError("reply has no integer id");
    const auto id = j["id"].get<std::int64_t>();
    if (id != expected_id)
        throw ProtocolError("reply id " + std::to_string(id) + " does not match request id " +
                            std::to_string(expected_id));
    if (!j.contains("ok") || !j["ok"].is_boolean()) throw ProtocolError("reply has no boolean ok");

    EvalReply r;
    r.ok = j["ok"].get<bool>();
    if (!r.ok) {
        r.error = j.value("error", std::string("evaluator reported failure"));
        return r;
    }
    if (!j.contains("objectives") || !j["objectives"].is_object()) throw ProtocolError("reply has no objectives");
    for (const auto& [name, v] : j["objectives"].items()) {
        if (v.is_number()) {
            r.objectives[name] = v.get<double>();
        } else if (v.is_null()) {
            r.objectives[name] = std::numeric_limits<double>::quiet_NaN();
        } else {
            throw ProtocolError("objective '" + name + "' is not a number");
        }
    }
    r.convergence_step = optional_int(j, "convergence_step");
    r.best_step = optional_int(j, "best_step");
    r.total_steps = optional_int(j, "total_steps");
    if (j.contains("manifest") && j["manifest"].is_string()) r.manifest = j["manifest"].get<std::string>();
    return r;
}

std::string encode_reply(std::int64_t id, const EvalReply& reply) {
    json j = {{"id", id}, {"ok", reply.ok}};
    if (!reply.ok) {
        j["error"] = reply.error;
        return j.dump();
    }
    j["objectives"] = json::object();
    for (const auto& [name, v] : reply.objectives) j["objectives"][name] = v;
    if (reply.convergence_step) j["convergence_step"] = *reply.convergence_step;
    if (reply.best_step) j["best_step"] = *reply.best_step;
    if (reply.total_steps) j["total_steps"] = *reply.total_steps;
    if (reply.manifest) j["manifest"] = *reply.manifest;
    return j.dump();
}

// ---- subprocess -----------------------------------------------------------

SubprocessEvaluator::SubprocessEvaluator(std::string command, std::vector<std::string> args,
                                         std::chrono::milliseconds timeout)
    : command_(std::move(command)), args_(std::move(args)), timeout_(timeout) {
    if (command_.empty()) throw InvalidArgument("evaluator command is empty");
    if (timeout_.count() <= 0) throw InvalidArgument("evaluator timeout must be positive");
}

SubprocessEvaluator::~SubprocessEvaluator() { terminate(); }

void SubprocessEvaluator::spawn() {
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2], out_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0) throw EvaluationError(std::string("pipe: ") + std::strerror(errno));
    if (pipe2(out_pipe, O_CLOEXEC) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw EvaluationError(std::string("pipe: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

    std::vector<char*> argv;
    argv.push_back(command_.data());
    for (auto& a : args_) argv.push_back(a.data());
    argv.push_back(nullptr);

    pid_t pid = -1;
    const int rc = posix_spawnp(&pid, command_.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    close(in_pipe[0]);
    close(out_pipe[1]);
    if (rc != 0) {
        close(in_pipe[1]);
        close(out_pipe[0]);
        throw EvaluationError("cannot start evaluator '" + command_ + "': " + std::strerror(rc));
    }
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    buffer_.clear();
}

void SubprocessEvaluator::terminate() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
        // Closing stdin lets a well-behaved child exit; anything left is killed.
        int status = 0;
        bool reaped = false;
        for (int i = 0; i < 20 && !reaped; ++i) {
            if (waitpid(pid_, &status, WNOHANG) == pid_) reaped = true;
            else usleep(5000);
        }
        if (!reaped) {
            kill(pid_, SIGKILL);
            waitpid(pid_, &status, 0);
        }
    }
    pid_ = -1;
    buffer_.clear();
}

std::string SubprocessEvaluator::roundtrip(const std::string& line) {
    if (pid_ < 0) spawn();
    const std::string out = line + "\n";
    std::size_t sent = 0;
    while (sent < out.size()) {
        const auto n = write(to_child_, out.data() + sent, out.size() - sent);
        if (n < 0) {
            if (errno == EINTR) continue;
            const std::string why = std::strerror(errno);
            terminate();
            throw EvaluationError("evaluator write failed: " + why);
        }
        sent += static_cast<std::size_t>(n);
    }

    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string reply = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return reply;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            terminate();
            throw EvaluationError("evaluator timed out after " + std::to_string(timeout_.count()) + " ms");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int pr = poll(&pfd, 1, static_cast<int>(std::min<std::int64_t>(left.count(), 1 << 30)));
        if (pr < 0) {
            if (errno == EINTR) continue;
            terminate();
            throw EvaluationError(std::string("poll failed: ") + std::strerror(errno));
        }
        if (pr == 0) continue;
        char chunk[4096];
        const auto n = read(from_child_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            terminate();
            throw EvaluationError("evaluator exited without replying");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

EvalReply SubprocessEvaluator::train(const TrainRequest& request) {
    const auto id = next_id();
    return decode_reply(roundtrip(encode_trainer_request(id, request)), id);
}

EvalReply SubprocessEvaluator::score(std::span<const double> delta) {
    const auto id = next_id();
    return decode_reply(roundtrip(encode_scorer_request(id, delta, manifest_)), id);
}

} // namespace bomf
