#pragma once

#include "srl/core/transition.hpp"
#include "srl/nets/feed_forward.hpp"

#include <array>

namespace srl::critic {

struct CriticSpec {
  int state_dim = 0;
  int action_dim = 0;
  int hidden_size = 256;
  int num_hidden_layers = 2;
};

template <typename Scalar>
struct CriticCache {
  nets::FeedForwardCache<Scalar> net;
};

/// Two soft Q-functions with a shared architecture, separate parameters and
/// EMA targets.
template <typename Scalar>
class TwinCritic {
 public:
  using Params = nets::ParameterSet<Scalar>;

  TwinCritic() = default;

  TwinCritic(const CriticSpec& spec, Rng& rng) : spec_(spec) {
    for (int k = 0; k < 2; ++k) {
      net_ = nets::FeedForward<Scalar>({spec.state_dim + spec.action_dim, 1, spec.hidden_size,
                                        spec.num_hidden_layers},
                                       params_[k], "critic.");
      net_.initialize(params_[k], rng);
      targets_[k] = params_[k];
    }
  }

  const CriticSpec& spec() const { return spec_; }
  Params& params(int k) { return params_.at(static_cast<std::size_t>(k)); }
  const Params& params(int k) const { return params_.at(static_cast<std::size_t>(k)); }
  Params& target(int k) { return targets_.at(static_cast<std::size_t>(k)); }
  const Params& target(int k) const { return targets_.at(static_cast<std::size_t>(k)); }

  /// Q-values (1 x B) for states and actions stacked column-wise.
  RowVector<Scalar> forward(const Params& p, const Matrix<Scalar>& states, const Matrix<Scalar>& actions,
                            CriticCache<Scalar>* cache = nullptr) const {
    require_dim(states.rows(), spec_.state_dim, "TwinCritic state");
    require_dim(actions.rows(), spec_.action_dim, "TwinCritic action");
    if (states.cols() != actions.cols()) throw DimensionError("TwinCritic: batch size mismatch");
    Matrix<Scalar> x(spec_.state_dim + spec_.action_dim, states.cols());
    x.topRows(spec_.state_dim) = states;
    x.bottomRows(spec_.action_dim) = actions;
    return net_.forward(p, x, cache ? &cache->net : nullptr).row(0);
  }

  /// Backpropagates dL/dQ (1 x B).
  void backward(const Params& p, const CriticCache<Scalar>& cache, const RowVector<Scalar>& dq, Params* grads,
                Matrix<Scalar>* d_states, Matrix<Scalar>* d_actions) const {
    Matrix<Scalar> dx = net_.backward(p, cache.net, Matrix<Scalar>(dq), grads);
    if (d_states) *d_states = dx.topRows(spec_.state_dim);
    if (d_actions) *d_actions = dx.bottomRows(spec_.action_dim);
  }

  Scalar q_value(int k, const Vector<Scalar>& s, const Vector<Scalar>& a) const {
    return forward(params(k), Matrix<Scalar>(s), Matrix<Scalar>(a))(0);
  }

  /// Pointwise minimum of the two target critics.
  RowVector<Scalar> min_target(const Matrix<Scalar>& states, const Matrix<Scalar>& actions) const {
    return forward(targets_[0], states, actions).cwiseMin(forward(targets_[1], states, actions));
  }

 private:
  CriticSpec spec_;
  nets::FeedForward<Scalar> net_;
  std::array<Params, 2> params_;
  std::array<Params, 2> targets_;
};

/// r + (1 - done) * gamma * (min_k Q_target_k(s', a') - alpha * log pi(a'|s')).
template <typename Scalar>
RowVector<Scalar> soft_bellman_target(const RowVector<Scalar>& rewards, const RowVector<Scalar>& dones,
                                      const RowVector<Scalar>& min_target_q, const RowVector<Scalar>& next_log_prob,
                                      Scalar alpha, Scalar gamma) {
  return (rewards.array() + (Scalar(1) - dones.array()) * gamma *
                                (min_target_q.array() - alpha * next_log_prob.array()))
      .matrix();
}

/// Sum over both critics of the mean squared error against the detached target.
/// Gradients for critic k go to grads[k] when given.
template <typename Scalar>
Scalar critic_loss(const TwinCritic<Scalar>& critic, const std::array<const nets::ParameterSet<Scalar>*, 2>& params,
                   const TransitionBatch<Scalar>& batch, const RowVector<Scalar>& q_target,
                   std::array<nets::ParameterSet<Scalar>*, 2> grads = {nullptr, nullptr}) {
  const Scalar n = static_cast<Scalar>(batch.size());
  Scalar total = 0;
  for (int k = 0; k < 2; ++k) {
    CriticCache<Scalar> cache;
    auto* g = grads[static_cast<std::size_t>(k)];
    RowVector<Scalar> q = critic.forward(*params[static_cast<std::size_t>(k)], batch.states, batch.actions,
                                         g ? &cache : nullptr);
    RowVector<Scalar> err = q - q_target;
    total += err.squaredNorm() / n;
    if (g) critic.backward(*params[static_cast<std::size_t>(k)], cache, (Scalar(2) / n) * err, g, nullptr, nullptr);
  }
  return total;
}

template <typename Scalar>
Scalar critic_loss(const TwinCritic<Scalar>& critic, const TransitionBatch<Scalar>& batch,
                   const RowVector<Scalar>& q_target,
                   std::array<nets::ParameterSet<Scalar>*, 2> grads = {nullptr, nullptr}) {
  return critic_loss(critic, {&critic.params(0), &critic.params(1)}, batch, q_target, grads);
}

}  // namespace srl::critic
