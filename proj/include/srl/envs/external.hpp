#pragma once

#include "srl/envs/environment.hpp"

#include <nlohmann/json.hpp>

#include <csignal>
#include <cstdio>
#include <optional>
#include <vector>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace srl::envs {

/// Environment served by a child process over JSON lines on stdin/stdout.
///
/// Requests and replies, one JSON object per line:
///   {"cmd":"spec"}                 -> {"state_dim":n,"action_dim":m,"max_episode_length":T,"dt":x}
///   {"cmd":"reset","seed":s}       -> {"state":[...]}
///   {"cmd":"step","action":[...]}  -> {"state":[...],"reward":r,"done":b,"truncated":b}
///   {"cmd":"close"}                   (no reply)
/// The simulator must be deterministic given the seed; clone() relies on it
/// by replaying the episode in a fresh process.
class ExternalEnvironment final : public Environment {
 public:
  explicit ExternalEnvironment(std::string command) : command_(std::move(command)) {
    spawn_();
    const auto reply = request_({{"cmd", "spec"}});
    try {
      spec_ = {reply.at("state_dim").get<int>(), reply.at("action_dim").get<int>(),
               reply.at("max_episode_length").get<int>(), reply.value("dt", 1.0)};
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("external env: malformed spec reply: " + std::string(e.what()));
    }
    if (spec_.state_dim <= 0 || spec_.action_dim <= 0) {
      throw std::runtime_error("external env: non-positive dimensions in spec");
    }
  }

  ExternalEnvironment(const ExternalEnvironment&) = delete;
  ExternalEnvironment& operator=(const ExternalEnvironment&) = delete;
  ~ExternalEnvironment() override { shutdown_(); }

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "external:" + command_; }

  Vector<double> reset(std::uint64_t seed) override {
    seed_ = seed;
    history_.clear();
    return state_from_(request_({{"cmd", "reset"}, {"seed", seed}}));
  }

  std::unique_ptr<Environment> clone() const override {
    auto copy = std::make_unique<ExternalEnvironment>(command_);
    if (seed_) {
      copy->reset(*seed_);
      for (const auto& a : history_) copy->step(a);
    }
    return copy;
  }

 protected:
  StepResult step_clipped(const Vector<double>& action) override {
    history_.push_back(action);
    const auto reply = request_({{"cmd", "step"},
                                 {"action", std::vector<double>(action.data(), action.data() + action.size())}});
    StepResult r;
    r.state = state_from_(reply);
    try {
      r.reward = reply.at("reward").get<double>();
      r.done = reply.value("done", false);
      r.truncated = reply.value("truncated", false);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("external env: malformed step reply: " + std::string(e.what()));
    }
    if (!std::isfinite(r.reward)) throw NumericError("external env: non-finite reward");
    return r;
  }

 private:
  void spawn_() {
    // A dead child must surface as a failed write, not a fatal signal.
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw std::runtime_error("external env: pipe failed");
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("external env: fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    out_ = fdopen(to_child[1], "w");
    in_ = fdopen(from_child[0], "r");
    if (!out_ || !in_) throw std::runtime_error("external env: fdopen failed");
  }

  void shutdown_() noexcept {
    if (out_) {
      std::fputs("{\"cmd\":\"close\"}\n", out_);
      std::fclose(out_);
      out_ = nullptr;
    }
    if (in_) {
      std::fclose(in_);
      in_ = nullptr;
    }
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  nlohmann::json request_(const nlohmann::json& msg) {
    const std::string line = msg.dump() + "\n";
    if (std::fputs(line.c_str(), out_) < 0 || std::fflush(out_) != 0) {
      throw std::runtime_error("external env: write to '" + command_ + "' failed");
    }
    std::string reply;
    for (int c = std::fgetc(in_); c != EOF && c != '\n'; c = std::fgetc(in_)) reply.push_back(static_cast<char>(c));
    if (reply.empty()) throw std::runtime_error("external env: '" + command_ + "' closed the connection");
    auto parsed = nlohmann::json::parse(reply, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw std::runtime_error("external env: unparsable reply: " + reply);
    }
    if (parsed.contains("error")) throw std::runtime_error("external env: " + parsed["error"].dump());
    return parsed;
  }

  Vector<double> state_from_(const nlohmann::json& reply) const {
    std::vector<double> s;
    try {
      s = reply.at("state").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("external env: missing state: " + std::string(e.what()));
    }
    require_dim(static_cast<Eigen::Index>(s.size()), spec_.state_dim, "external env state");
    return Eigen::Map<Vector<double>>(s.data(), static_cast<Eigen::Index>(s.size()));
  }

  std::string command_;
  EnvSpec spec_;
  pid_t pid_ = -1;
  std::FILE* out_ = nullptr;
  std::FILE* in_ = nullptr;
  std::optional<std::uint64_t> seed_;
  std::vector<Vector<double>> history_;
};

}  // namespace srl::envs
