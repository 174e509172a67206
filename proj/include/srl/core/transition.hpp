#pragma once

#include "srl/core/types.hpp"

#include <vector>

namespace srl {

/// One primitive environment step.
///
/// `done` marks true termination only. A time-limit cut sets `truncated`
/// instead, so the TD target still bootstraps through it.
struct Transition {
  Vector<Real> state;
  Vector<Real> action;
  Real reward = 0;
  Vector<Real> next_state;
  bool done = false;
  bool truncated = false;

  bool finite() const {
    return state.allFinite() && action.allFinite() && std::isfinite(reward) &&
           next_state.allFinite();
  }
};

/// Column-stacked batch of transitions (one column per sample).
template <typename Scalar>
struct TransitionBatch {
  Matrix<Scalar> states;       // d_s x n
  Matrix<Scalar> actions;      // d_a x n
  RowVector<Scalar> rewards;   // 1 x n
  Matrix<Scalar> next_states;  // d_s x n
  RowVector<Scalar> dones;     // 1 x n, 1 on termination

  Eigen::Index size() const { return states.cols(); }

  template <typename Other>
  TransitionBatch<Other> cast() const {
    return {states.template cast<Other>(), actions.template cast<Other>(),
            rewards.template cast<Other>(), next_states.template cast<Other>(),
            dones.template cast<Other>()};
  }
};

template <typename Scalar>
TransitionBatch<Scalar> make_batch(const std::vector<Transition>& items) {
  if (items.empty()) throw std::invalid_argument("make_batch: empty transition list");
  const auto ds = items.front().state.size();
  const auto da = items.front().action.size();
  const auto n = static_cast<Eigen::Index>(items.size());
  TransitionBatch<Scalar> b{Matrix<Scalar>(ds, n), Matrix<Scalar>(da, n), RowVector<Scalar>(n),
                            Matrix<Scalar>(ds, n), RowVector<Scalar>(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = items[static_cast<std::size_t>(i)];
    require_dim(t.state.size(), ds, "make_batch state");
    require_dim(t.action.size(), da, "make_batch action");
    require_dim(t.next_state.size(), ds, "make_batch next_state");
    b.states.col(i) = t.state.cast<Scalar>();
    b.actions.col(i) = t.action.cast<Scalar>();
    b.rewards(i) = static_cast<Scalar>(t.reward);
    b.next_states.col(i) = t.next_state.cast<Scalar>();
    b.dones(i) = t.done ? Scalar(1) : Scalar(0);
  }
  return b;
}

}  // namespace srl
