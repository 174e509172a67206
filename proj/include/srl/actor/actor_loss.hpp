#pragma once

#include "srl/actor/sequence_policy.hpp"
#include "srl/core/config.hpp"
#include "srl/critic/twin_critic.hpp"
#include "srl/model/dynamics_model.hpp"

#include <vector>

namespace srl::actor {

template <typename Scalar>
struct ActorLossResult {
  Scalar loss = 0;
  std::vector<Scalar> mean_log_prob;  // per sequence position, batch mean
  Scalar mean_q = 0;                  // averaged over positions and batch
  std::vector<Scalar> log_probs;      // every sampled log-probability, position-major
};

/// Sequence actor objective. For each state s_t a J-step sequence is drawn,
/// intermediate states come from the target model,
///   s~_0 = s_t,  s~_{j+1} = m_target(s~_j, a~_j),
/// and the loss is the batch mean of sum_j [alpha log pi(a~_j) - Q(s~_j, a~_j)].
/// Critic and model parameters are frozen; gradients reach the policy through
/// the actions directly and through the imagined states.
template <typename Scalar>
ActorLossResult<Scalar> actor_loss(const SequencePolicy<Scalar>& policy, const nets::ParameterSet<Scalar>& policy_params,
                                   const critic::TwinCritic<Scalar>& critic,
                                   const model::DynamicsModel<Scalar>* model, const Matrix<Scalar>& states,
                                   Scalar alpha, const std::vector<Matrix<Scalar>>& noise,
                                   CriticReduction reduction, nets::ParameterSet<Scalar>* grads,
                                   const Matrix<Scalar>* initial_input = nullptr) {
  const int J = static_cast<int>(noise.size());
  if (J > 1 && !model) throw std::invalid_argument("actor_loss: sequences longer than 1 need a model");
  const Eigen::Index B = states.cols();
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(B);

  const SequenceDraw<Scalar> draw = policy.forward(policy_params, states, noise, initial_input);

  std::vector<Matrix<Scalar>> imagined(static_cast<std::size_t>(J));
  std::vector<model::ModelCache<Scalar>> model_caches(static_cast<std::size_t>(std::max(J - 1, 0)));
  imagined[0] = states;
  for (int j = 1; j < J; ++j) {
    imagined[j] = model->forward(model->target_params(), imagined[j - 1], draw.actions[j - 1],
                                 grads ? &model_caches[j - 1] : nullptr);
    if (!imagined[j].allFinite()) {
      throw NumericError("actor_loss: non-finite imagined state at step " + std::to_string(j), j);
    }
  }

  ActorLossResult<Scalar> out;
  std::vector<Matrix<Scalar>> d_actions(static_cast<std::size_t>(J));
  std::vector<Matrix<Scalar>> d_states(static_cast<std::size_t>(J));
  std::vector<RowVector<Scalar>> d_log_probs(static_cast<std::size_t>(J));
  Scalar total = 0;
  Scalar q_sum = 0;
  for (int j = 0; j < J; ++j) {
    std::array<critic::CriticCache<Scalar>, 2> caches;
    const RowVector<Scalar> q1 = critic.forward(critic.params(0), imagined[j], draw.actions[j], &caches[0]);
    const RowVector<Scalar> q2 = critic.forward(critic.params(1), imagined[j], draw.actions[j], &caches[1]);
    RowVector<Scalar> w1(B), w2(B);  // dQ/dq_k per sample
    switch (reduction) {
      case CriticReduction::min:
        w1 = (q1.array() <= q2.array()).select(RowVector<Scalar>::Ones(B), RowVector<Scalar>::Zero(B));
        w2 = RowVector<Scalar>::Ones(B) - w1;
        break;
      case CriticReduction::first:
        w1.setOnes();
        w2.setZero();
        break;
      case CriticReduction::mean:
        w1.setConstant(Scalar(0.5));
        w2.setConstant(Scalar(0.5));
        break;
    }
    const RowVector<Scalar> q = (w1.array() * q1.array() + w2.array() * q2.array()).matrix();
    const RowVector<Scalar>& lp = draw.log_probs[j];
    total += (alpha * lp.sum() - q.sum()) * inv_b;
    q_sum += q.sum();
    out.mean_log_prob.push_back(lp.mean());
    for (Eigen::Index b = 0; b < B; ++b) out.log_probs.push_back(lp(b));

    if (grads) {
      d_log_probs[j] = RowVector<Scalar>::Constant(B, alpha * inv_b);
      Matrix<Scalar> ds1, da1, ds2, da2;
      critic.backward(critic.params(0), caches[0], (-inv_b) * w1, nullptr, &ds1, &da1);
      critic.backward(critic.params(1), caches[1], (-inv_b) * w2, nullptr, &ds2, &da2);
      d_actions[j] = da1 + da2;
      d_states[j] = ds1 + ds2;
    }
  }
  out.loss = total;
  out.mean_q = q_sum / static_cast<Scalar>(B * J);

  if (grads) {
    // Reverse through the imagined rollout: s~_j feeds both Q_j and the model step to s~_{j+1}.
    for (int j = J - 1; j >= 1; --j) {
      Matrix<Scalar> ds_prev, da_prev;
      model->backward(model->target_params(), model_caches[j - 1], d_states[j], nullptr, &ds_prev, &da_prev);
      d_states[j - 1] += ds_prev;
      d_actions[j - 1] += da_prev;
    }
    policy.backward(policy_params, draw, d_actions, d_log_probs, grads);
  }
  return out;
}

}  // namespace srl::actor
