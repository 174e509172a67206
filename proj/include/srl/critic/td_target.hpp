#pragma once

#include "srl/actor/sequence_policy.hpp"
#include "srl/critic/twin_critic.hpp"

namespace srl::critic {

/// Soft Bellman targets for a batch of real transitions. The bootstrap action
/// is the first action of a fresh sequence sampled at s'. Nothing here is
/// differentiated. `initial_input` optionally seeds the recurrent input
/// (the executed action a when the policy is conditioned on it).
template <typename Scalar>
RowVector<Scalar> td_target(const TransitionBatch<Scalar>& batch, const actor::SequencePolicy<Scalar>& policy,
                            const TwinCritic<Scalar>& critic, Scalar alpha, Scalar gamma, Rng& rng,
                            const Matrix<Scalar>* initial_input = nullptr) {
  const auto draw = policy.forward(policy.params(), batch.next_states,
                                   policy.draw_noise(1, batch.size(), rng), initial_input);
  const RowVector<Scalar> q = critic.min_target(batch.next_states, draw.actions[0]);
  return soft_bellman_target(batch.rewards, batch.dones, q, draw.log_probs[0], alpha, gamma);
}

}  // namespace srl::critic
