#pragma once

#include "srl/envs/external.hpp"
#include "srl/envs/linear_system.hpp"
#include "srl/envs/pendulum.hpp"
#include "srl/envs/point_reacher.hpp"

#include <stdexcept>

namespace srl::envs {

class UnknownEnvironment : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Resolves "pendulum", "linear", "reacher-point" or "external:<command>".
inline std::unique_ptr<Environment> make_environment(const std::string& name) {
  if (name == "pendulum") return std::make_unique<Pendulum>();
  if (name == "linear") return std::make_unique<LinearSystem>();
  if (name == "reacher-point") return std::make_unique<PointReacher>();
  constexpr std::string_view prefix = "external:";
  if (name.starts_with(prefix) && name.size() > prefix.size()) {
    return std::make_unique<ExternalEnvironment>(name.substr(prefix.size()));
  }
  throw UnknownEnvironment("unknown environment '" + name + "'");
}

}  // namespace srl::envs
