#pragma once

#include "srl/nets/feed_forward.hpp"

namespace srl::latent {

struct EncoderSpec {
  int state_dim = 0;
  int latent_dim = 50;
  int hidden_size = 256;
  int num_hidden_layers = 2;
};

/// State encoder e(s) with an EMA target copy. The target never receives
/// gradients; it is only moved by ema_update.
template <typename Scalar>
class Encoder {
 public:
  using Params = nets::ParameterSet<Scalar>;

  Encoder(const EncoderSpec& spec, Rng& rng)
      : spec_(spec),
        net_({spec.state_dim, spec.latent_dim, spec.hidden_size, spec.num_hidden_layers}, params_, "encoder.") {
    net_.initialize(params_, rng);
    target_ = params_;
  }

  const EncoderSpec& spec() const { return spec_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  Params& target_params() { return target_; }
  const Params& target_params() const { return target_; }

  Matrix<Scalar> encode(const Params& p, const Matrix<Scalar>& states,
                        nets::FeedForwardCache<Scalar>* cache = nullptr) const {
    require_dim(states.rows(), spec_.state_dim, "Encoder state");
    return net_.forward(p, states, cache);
  }

  Matrix<Scalar> encode(const Matrix<Scalar>& states) const { return encode(params_, states); }

  /// Returns dL/d(states); parameter gradients accumulate into `grads`.
  Matrix<Scalar> backward(const Params& p, const nets::FeedForwardCache<Scalar>& cache,
                          Matrix<Scalar> d_latent, Params* grads) const {
    return net_.backward(p, cache, std::move(d_latent), grads);
  }

  /// Makes both copies compute e(s) = s exactly, using relu(x) - relu(-x).
  /// Needs latent_dim == state_dim and hidden_size >= 2 * state_dim.
  void set_identity() {
    const int n = spec_.state_dim;
    if (spec_.latent_dim != n || spec_.hidden_size < 2 * n || spec_.num_hidden_layers < 1) {
      throw std::invalid_argument("Encoder::set_identity: needs latent_dim == state_dim and hidden >= 2 d_s");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i].setZero();
    const int L = spec_.num_hidden_layers;
    auto W = [&](int l) -> Matrix<Scalar>& { return params_[*params_.find("encoder.l" + std::to_string(l) + ".weight")]; };
    // Layer 0 splits into positive and negative parts, later hidden layers pass them through.
    W(0).topRows(n).setIdentity();
    W(0).middleRows(n, n) = -Matrix<Scalar>::Identity(n, n);
    for (int l = 1; l < L; ++l) W(l).topLeftCorner(2 * n, 2 * n).setIdentity();
    W(L).leftCols(n).setIdentity();
    W(L).middleCols(n, n) = -Matrix<Scalar>::Identity(n, n);
    target_ = params_;
  }

 private:
  EncoderSpec spec_;
  Params params_;
  Params target_;
  nets::FeedForward<Scalar> net_;
};

}  // namespace srl::latent
