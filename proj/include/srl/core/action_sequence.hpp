#pragma once

#include "srl/core/types.hpp"

#include <vector>

namespace srl {

/// J primitive actions emitted from a single observation, with their log-probabilities.
struct ActionSequence {
  std::vector<Vector<Real>> actions;
  std::vector<Real> log_probs;
  Vector<Real> origin_state;

  std::size_t length() const { return actions.size(); }

  bool valid() const {
    if (actions.empty() || actions.size() != log_probs.size()) return false;
    for (std::size_t k = 0; k < actions.size(); ++k) {
      if (!std::isfinite(log_probs[k]) || !actions[k].allFinite()) return false;
      if (actions[k].cwiseAbs().maxCoeff() > Real(1)) return false;
    }
    return true;
  }
};

}  // namespace srl
