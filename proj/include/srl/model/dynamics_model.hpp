#pragma once

#include "srl/core/transition.hpp"
#include "srl/nets/feed_forward.hpp"

#include <cstdint>
#include <vector>

namespace srl::model {

/// Per-dimension state statistics used to whiten model inputs and targets.
/// Accumulates with Welford updates until frozen; identity before that.
template <typename Scalar>
class StateNormalizer {
 public:
  StateNormalizer() = default;
  explicit StateNormalizer(int dim)
      : mean_(Vector<Scalar>::Zero(dim)), std_(Vector<Scalar>::Ones(dim)),
        acc_mean_(Eigen::VectorXd::Zero(dim)), acc_m2_(Eigen::VectorXd::Zero(dim)) {}

  void observe(const Vector<Scalar>& s) {
    if (frozen_) return;
    require_dim(s.size(), mean_.size(), "StateNormalizer::observe");
    ++count_;
    const Eigen::VectorXd x = s.template cast<double>();
    const Eigen::VectorXd delta = x - acc_mean_;
    acc_mean_ += delta / static_cast<double>(count_);
    acc_m2_ += (delta.array() * (x - acc_mean_).array()).matrix();
  }

  /// Fixes mean/std from the accumulated samples. Standard deviations are
  /// floored so constant dimensions do not blow up.
  void freeze(double min_std = 1e-2) {
    if (frozen_) return;
    frozen_ = true;
    if (count_ < 2) return;
    mean_ = acc_mean_.cast<Scalar>();
    std_ = (acc_m2_ / static_cast<double>(count_ - 1)).cwiseSqrt().cwiseMax(min_std).cast<Scalar>();
  }

  void set(const Vector<Scalar>& mean, const Vector<Scalar>& std) {
    require_dim(std.size(), mean.size(), "StateNormalizer::set");
    mean_ = mean;
    std_ = std;
    frozen_ = true;
  }

  bool frozen() const { return frozen_; }
  std::int64_t count() const { return count_; }
  const Vector<Scalar>& mean() const { return mean_; }
  const Vector<Scalar>& std() const { return std_; }

 private:
  Vector<Scalar> mean_, std_;
  Eigen::VectorXd acc_mean_, acc_m2_;
  std::int64_t count_ = 0;
  bool frozen_ = false;
};

struct DynamicsModelSpec {
  int state_dim = 0;
  int action_dim = 0;
  int hidden_size = 256;
  int num_hidden_layers = 2;
  bool predict_delta = false;
};

template <typename Scalar>
struct ModelCache {
  nets::FeedForwardCache<Scalar> net;
  Matrix<Scalar> states;
};

/// One-step dynamics model s' = m(s, a) with an EMA target copy.
///
/// The network sees whitened states and raw actions and outputs a whitened
/// absolute next state (or a whitened delta when `predict_delta` is set).
template <typename Scalar>
class DynamicsModel {
 public:
  using Params = nets::ParameterSet<Scalar>;

  DynamicsModel() = default;

  DynamicsModel(const DynamicsModelSpec& spec, Rng& rng) : spec_(spec), normalizer_(spec.state_dim) {
    net_ = nets::FeedForward<Scalar>({spec.state_dim + spec.action_dim, spec.state_dim,
                                      spec.hidden_size, spec.num_hidden_layers},
                                     params_, "model.");
    net_.initialize(params_, rng);
    target_ = params_;
  }

  const DynamicsModelSpec& spec() const { return spec_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  Params& target_params() { return target_; }
  const Params& target_params() const { return target_; }
  StateNormalizer<Scalar>& normalizer() { return normalizer_; }
  const StateNormalizer<Scalar>& normalizer() const { return normalizer_; }

  /// Number of network evaluations so far, counted per state (column).
  std::uint64_t evaluations() const { return evaluations_; }
  void reset_evaluations() { evaluations_ = 0; }

  /// Batched prediction with explicit parameters (online or target).
  Matrix<Scalar> forward(const Params& p, const Matrix<Scalar>& states, const Matrix<Scalar>& actions,
                         ModelCache<Scalar>* cache = nullptr) const {
    require_dim(states.rows(), spec_.state_dim, "DynamicsModel state");
    require_dim(actions.rows(), spec_.action_dim, "DynamicsModel action");
    if (states.cols() != actions.cols()) throw DimensionError("DynamicsModel: batch size mismatch");
    evaluations_ += static_cast<std::uint64_t>(states.cols());
    Matrix<Scalar> x(spec_.state_dim + spec_.action_dim, states.cols());
    x.topRows(spec_.state_dim) = whiten_(states);
    x.bottomRows(spec_.action_dim) = actions;
    Matrix<Scalar> y = net_.forward(p, x, cache ? &cache->net : nullptr);
    if (cache) cache->states = states;
    return unwhiten_output_(y, states);
  }

  /// Backpropagates dL/d(next state). Parameter gradients go to `grads` if given.
  void backward(const Params& p, const ModelCache<Scalar>& cache, const Matrix<Scalar>& d_next,
                Params* grads, Matrix<Scalar>* d_states, Matrix<Scalar>* d_actions) const {
    Matrix<Scalar> dy = (d_next.array().colwise() * normalizer_.std().array()).matrix();
    Matrix<Scalar> dx = net_.backward(p, cache.net, std::move(dy), grads);
    if (d_states) {
      *d_states = (dx.topRows(spec_.state_dim).array().colwise() / normalizer_.std().array()).matrix();
      if (spec_.predict_delta) *d_states += d_next;
    }
    if (d_actions) *d_actions = dx.bottomRows(spec_.action_dim);
  }

  /// s' = m(s, a) with the online parameters.
  Vector<Scalar> predict(const Vector<Scalar>& s, const Vector<Scalar>& a) const {
    return predict_with(params_, s, a);
  }

  Vector<Scalar> predict_with(const Params& p, const Vector<Scalar>& s, const Vector<Scalar>& a) const {
    if (!s.allFinite() || !a.allFinite()) throw NumericError("DynamicsModel::predict: non-finite input");
    return forward(p, Matrix<Scalar>(s), Matrix<Scalar>(a)).col(0);
  }

  /// Imagined states s_1..s_J from s_0 under the target parameters, one model
  /// evaluation per action.
  std::vector<Vector<Scalar>> rollout(const Vector<Scalar>& s0,
                                      const std::vector<Vector<Scalar>>& actions) const {
    if (actions.empty()) throw std::invalid_argument("DynamicsModel::rollout: need at least one action");
    std::vector<Vector<Scalar>> out;
    out.reserve(actions.size());
    Vector<Scalar> s = s0;
    for (std::size_t k = 0; k < actions.size(); ++k) {
      s = forward(target_, Matrix<Scalar>(s), Matrix<Scalar>(actions[k])).col(0);
      if (!s.allFinite()) {
        throw NumericError("DynamicsModel::rollout: non-finite imagined state at step " + std::to_string(k + 1),
                           static_cast<int>(k + 1));
      }
      out.push_back(s);
    }
    return out;
  }

  /// Mean squared prediction error over batch and state dimensions, measured
  /// in whitened units. Accumulates dL/dparams into `grads` when given.
  Scalar loss(const Params& p, const TransitionBatch<Scalar>& batch, Params* grads = nullptr) const {
    if (batch.size() == 0) throw std::invalid_argument("model_loss: empty batch");
    ModelCache<Scalar> cache;
    Matrix<Scalar> pred = forward(p, batch.states, batch.actions, grads ? &cache : nullptr);
    // Residual in whitened units equals the raw residual divided by std.
    Matrix<Scalar> resid =
        ((pred - batch.next_states).array().colwise() / normalizer_.std().array()).matrix();
    const Scalar n = static_cast<Scalar>(resid.size());
    const Scalar value = resid.squaredNorm() / n;
    if (grads) {
      Matrix<Scalar> d_next =
          ((Scalar(2) / n) * resid.array()).colwise() / normalizer_.std().array();
      backward(p, cache, d_next, grads, nullptr, nullptr);
    }
    return value;
  }

  Scalar loss(const TransitionBatch<Scalar>& batch, Params* grads = nullptr) const {
    return loss(params_, batch, grads);
  }

 private:
  Matrix<Scalar> whiten_(const Matrix<Scalar>& s) const {
    return ((s.colwise() - normalizer_.mean()).array().colwise() / normalizer_.std().array()).matrix();
  }

  Matrix<Scalar> unwhiten_output_(const Matrix<Scalar>& y, const Matrix<Scalar>& states) const {
    Matrix<Scalar> scaled = (y.array().colwise() * normalizer_.std().array()).matrix();
    if (spec_.predict_delta) return states + scaled;
    return scaled.colwise() + normalizer_.mean();
  }

  DynamicsModelSpec spec_;
  nets::FeedForward<Scalar> net_;
  Params params_;
  Params target_;
  StateNormalizer<Scalar> normalizer_;
  mutable std::uint64_t evaluations_ = 0;
};

/// Plain mean of squared differences over all entries.
template <typename Scalar>
Scalar mean_squared_error(const Matrix<Scalar>& prediction, const Matrix<Scalar>& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
    throw DimensionError("mean_squared_error: shape mismatch");
  }
  if (prediction.size() == 0) throw std::invalid_argument("mean_squared_error: empty input");
  return (prediction - target).squaredNorm() / static_cast<Scalar>(prediction.size());
}

}  // namespace srl::model
