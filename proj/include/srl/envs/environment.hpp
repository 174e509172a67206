#pragma once

#include "srl/core/types.hpp"

#include <cstdint>
#include <iostream>
#include <memory>
#include <string>

namespace srl::envs {

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  int max_episode_length = 0;
  double dt = 0;
};

struct StepResult {
  Vector<double> state;
  double reward = 0;
  bool done = false;       // true termination
  bool truncated = false;  // time limit reached
  bool finished() const { return done || truncated; }
};

/// Reset/step contract shared by bundled and external environments.
///
/// Actions live in [-1, 1]^d_a; out-of-range actions are clipped (with a
/// warning on the first occurrence) and non-finite actions are rejected.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual std::string name() const = 0;
  virtual Vector<double> reset(std::uint64_t seed) = 0;

  StepResult step(const Vector<double>& action) {
    require_dim(action.size(), spec().action_dim, "Environment::step action");
    if (!action.allFinite()) throw NumericError(name() + ": non-finite action");
    if (action.cwiseAbs().maxCoeff() > 1.0) {
      if (!warned_) {
        std::clog << "warning: " << name() << ": action outside [-1, 1] clipped\n";
        warned_ = true;
      }
      ++clipped_;
      return step_clipped(action.cwiseMax(-1.0).cwiseMin(1.0));
    }
    return step_clipped(action);
  }

  /// Independent copy including the current internal state.
  virtual std::unique_ptr<Environment> clone() const = 0;

  std::uint64_t clipped_actions() const { return clipped_; }

 protected:
  virtual StepResult step_clipped(const Vector<double>& action) = 0;

 private:
  bool warned_ = false;
  std::uint64_t clipped_ = 0;
};

}  // namespace srl::envs
