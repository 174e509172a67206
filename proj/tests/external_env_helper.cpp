// Serves the bundled pendulum over the JSON-lines environment protocol.
// Passing "--terminate-at N" ends every episode with done=true after N steps.

#include "srl/envs/pendulum.hpp"

#include <nlohmann/json.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
  int terminate_at = -1;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--terminate-at") terminate_at = std::stoi(argv[i + 1]);
  }
  srl::envs::Pendulum env;
  int t = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto msg = nlohmann::json::parse(line, nullptr, false);
    if (msg.is_discarded()) {
      std::cout << nlohmann::json{{"error", "bad json"}}.dump() << std::endl;
      continue;
    }
    const std::string cmd = msg.value("cmd", "");
    nlohmann::json reply;
    if (cmd == "close") return 0;
    if (cmd == "spec") {
      reply = {{"state_dim", 3}, {"action_dim", 1}, {"max_episode_length", 200}, {"dt", 0.05}};
    } else if (cmd == "reset") {
      t = 0;
      const auto s = env.reset(msg.at("seed").get<std::uint64_t>());
      reply = {{"state", std::vector<double>(s.data(), s.data() + s.size())}};
    } else if (cmd == "step") {
      const auto a = msg.at("action").get<std::vector<double>>();
      const auto r = env.step(Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())));
      ++t;
      reply = {{"state", std::vector<double>(r.state.data(), r.state.data() + r.state.size())},
               {"reward", r.reward},
               {"done", terminate_at > 0 && t >= terminate_at},
               {"truncated", r.truncated}};
    } else {
      reply = {{"error", "unknown command"}};
    }
    std::cout << reply.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) << std::endl;
  }
  return 0;
}
