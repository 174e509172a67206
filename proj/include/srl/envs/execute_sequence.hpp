#pragma once

#include "srl/envs/environment.hpp"

#include <vector>

namespace srl::envs {

struct SequenceOutcome {
  std::vector<Vector<double>> observations;  // every k-th state
  std::vector<double> rewards;               // one per executed primitive step
  Vector<double> final_state;                // state after the last executed step
  bool done = false;
  bool truncated = false;

  double total_reward() const {
    double s = 0;
    for (double r : rewards) s += r;
    return s;
  }
  std::size_t steps() const { return rewards.size(); }
  bool finished() const { return done || truncated; }
};

/// Runs the actions in order, surfacing only every k-th observation. Stops at
/// the first terminal or truncated step.
template <typename ActionRange>
SequenceOutcome execute_sequence(Environment& env, const ActionRange& actions, int observe_every) {
  if (observe_every < 1) throw std::invalid_argument("execute_sequence: observe_every must be >= 1");
  SequenceOutcome out;
  int i = 0;
  for (const auto& a : actions) {
    StepResult r = env.step(a.template cast<double>());
    ++i;
    out.rewards.push_back(r.reward);
    if (i % observe_every == 0) out.observations.push_back(r.state);
    out.final_state = std::move(r.state);
    if (r.finished()) {
      out.done = r.done;
      out.truncated = r.truncated;
      break;
    }
  }
  return out;
}

}  // namespace srl::envs
