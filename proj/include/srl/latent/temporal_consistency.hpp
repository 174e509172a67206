#pragma once

#include "srl/core/replay_buffer.hpp"
#include "srl/latent/encoder.hpp"
#include "srl/model/dynamics_model.hpp"

#include <type_traits>
#include <deque>

namespace srl::latent {

/// H+1 consecutive observations and the H actions between them, per column.
template <typename Scalar>
struct LatentRolloutBatch {
  std::vector<Matrix<Scalar>> observations;  // H + 1 entries, d_s x B
  std::vector<Matrix<Scalar>> actions;       // H entries, d_a x B
  int horizon() const { return static_cast<int>(actions.size()); }
  Eigen::Index size() const { return observations.empty() ? 0 : observations.front().cols(); }
};

/// Window of `horizon` transitions starting at logical index `start`.
template <typename Scalar>
LatentRolloutBatch<Scalar> slice_window(const ReplayBuffer& buffer, std::size_t start, int horizon) {
  LatentRolloutBatch<Scalar> b;
  for (int h = 0; h < horizon; ++h) {
    const Transition t = buffer.at(start + static_cast<std::size_t>(h));
    b.observations.push_back(t.state.cast<Scalar>());
    b.actions.push_back(t.action.cast<Scalar>());
    if (h == horizon - 1) b.observations.push_back(t.next_state.cast<Scalar>());
  }
  return b;
}

/// Uniformly samples n windows that lie inside a single episode.
template <typename Scalar>
LatentRolloutBatch<Scalar> sample_windows(const ReplayBuffer& buffer, std::size_t n, int horizon, Rng& rng) {
  if (horizon < 1) throw std::invalid_argument("sample_windows: horizon must be >= 1");
  if (buffer.size() < static_cast<std::size_t>(horizon)) {
    throw std::runtime_error("sample_windows: buffer shorter than the horizon");
  }
  std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - static_cast<std::size_t>(horizon));
  LatentRolloutBatch<Scalar> out;
  out.observations.assign(static_cast<std::size_t>(horizon) + 1, Matrix<Scalar>(buffer.state_dim(), n));
  out.actions.assign(static_cast<std::size_t>(horizon), Matrix<Scalar>(buffer.action_dim(), n));
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t start = 0;
    int tries = 0;
    do {
      start = pick(rng);
      if (++tries > 1000) throw std::runtime_error("sample_windows: no contiguous window found");
    } while (!buffer.contiguous(start, static_cast<std::size_t>(horizon)));
    const auto w = slice_window<Scalar>(buffer, start, horizon);
    for (int h = 0; h <= horizon; ++h) out.observations[h].col(static_cast<Eigen::Index>(c)) = w.observations[h];
    for (int h = 0; h < horizon; ++h) out.actions[h].col(static_cast<Eigen::Index>(c)) = w.actions[h];
  }
  return out;
}

/// Secondary store of contiguous H-step segments built while transitions
/// arrive. It holds the same windows that re-slicing the replay buffer gives.
class SegmentBuffer {
 public:
  explicit SegmentBuffer(int horizon) : horizon_(horizon) {
    if (horizon < 1) throw std::invalid_argument("SegmentBuffer: horizon must be >= 1");
  }

  void push(const Transition& t) {
    pending_.push_back(t);
    if (static_cast<int>(pending_.size()) > horizon_) pending_.pop_front();
    if (static_cast<int>(pending_.size()) == horizon_) segments_.emplace_back(pending_.begin(), pending_.end());
    if (t.done || t.truncated) pending_.clear();
  }

  void end_episode() { pending_.clear(); }

  std::size_t size() const { return segments_.size(); }
  const std::vector<Transition>& segment(std::size_t i) const { return segments_.at(i); }

 private:
  int horizon_;
  std::deque<Transition> pending_;
  std::vector<std::vector<Transition>> segments_;
};

namespace detail {

template <typename Scalar>
RowVector<Scalar> column_norms(const Matrix<Scalar>& x, const char* what) {
  RowVector<Scalar> n = x.colwise().norm();
  if ((n.array() <= Scalar(0)).any() || !n.allFinite()) {
    throw NumericError(std::string("temporal_consistency_loss: zero-norm or non-finite ") + what);
  }
  return n;
}

}  // namespace detail

template <typename Scalar>
struct ConsistencyResult {
  Scalar loss = 0;
  std::vector<Scalar> cosine;  // batch-mean cosine per h = 0..H
};

/// Discounted cosine consistency between latent predictions and target
/// encodings, summed over h = 0..H inclusive:
///   e~_0 = e(o_t), e~_{h+1} = m(e~_h, a_h), e^_h = e_target(o_{t+h}),
///   loss = mean_b sum_h -gamma^h cos(e~_h, e^_h).
/// Gradients flow into the online encoder and the latent model only.
template <typename Scalar>
ConsistencyResult<Scalar> temporal_consistency_loss(const Encoder<Scalar>& encoder,
                                                    const nets::ParameterSet<Scalar>& encoder_params,
                                                    const model::DynamicsModel<Scalar>& latent_model,
                                                    const nets::ParameterSet<Scalar>& model_params,
                                                    const LatentRolloutBatch<Scalar>& batch, std::type_identity_t<Scalar> gamma,
                                                    std::type_identity_t<nets::ParameterSet<Scalar>>* encoder_grads,
                                                    std::type_identity_t<nets::ParameterSet<Scalar>>* model_grads) {
  const int H = batch.horizon();
  if (H < 1) throw std::invalid_argument("temporal_consistency_loss: horizon must be >= 1");
  if (static_cast<int>(batch.observations.size()) != H + 1) {
    throw DimensionError("temporal_consistency_loss: need H + 1 observations");
  }
  const Eigen::Index B = batch.size();
  const Scalar inv_b = Scalar(1) / static_cast<Scalar>(B);
  const bool want_grads = encoder_grads || model_grads;

  nets::FeedForwardCache<Scalar> enc_cache;
  std::vector<model::ModelCache<Scalar>> model_caches(static_cast<std::size_t>(H));
  std::vector<Matrix<Scalar>> pred(static_cast<std::size_t>(H) + 1);
  pred[0] = encoder.encode(encoder_params, batch.observations[0], want_grads ? &enc_cache : nullptr);
  for (int h = 0; h < H; ++h) {
    pred[h + 1] = latent_model.forward(model_params, pred[h], batch.actions[h], want_grads ? &model_caches[h] : nullptr);
  }

  ConsistencyResult<Scalar> out;
  std::vector<Matrix<Scalar>> d_pred(static_cast<std::size_t>(H) + 1);
  Scalar weight = 1;
  for (int h = 0; h <= H; ++h, weight *= gamma) {
    const Matrix<Scalar> target = encoder.encode(encoder.target_params(), batch.observations[h]);
    const RowVector<Scalar> np = detail::column_norms(pred[h], "prediction");
    const RowVector<Scalar> nt = detail::column_norms(target, "target");
    const Matrix<Scalar> up = pred[h].array().rowwise() / np.array();
    const Matrix<Scalar> ut = target.array().rowwise() / nt.array();
    const RowVector<Scalar> cos = (up.array() * ut.array()).colwise().sum().matrix();
    out.cosine.push_back(cos.mean());
    out.loss -= weight * cos.sum() * inv_b;
    if (want_grads) {
      // d cos / d x = (u_t - cos u_x) / |x|
      Matrix<Scalar> g = ut - (up.array().rowwise() * cos.array()).matrix();
      g.array().rowwise() /= np.array();
      d_pred[h] = (-weight * inv_b) * g;
    }
  }
  if (want_grads) {
    for (int h = H; h >= 1; --h) {
      Matrix<Scalar> ds;
      latent_model.backward(model_params, model_caches[h - 1], d_pred[h], model_grads, &ds, nullptr);
      d_pred[h - 1] += ds;
    }
    if (encoder_grads) encoder.backward(encoder_params, enc_cache, d_pred[0], encoder_grads);
  }
  return out;
}

}  // namespace srl::latent
