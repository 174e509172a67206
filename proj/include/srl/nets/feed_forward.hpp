#pragma once

#include "srl/nets/parameter_set.hpp"

#include <string>
#include <vector>

namespace srl::nets {

enum class Activation { relu, tanh, identity };

struct FeedForwardSpec {
  int input_dim = 0;
  int output_dim = 0;
  int hidden_size = 256;
  int num_hidden_layers = 2;  // 0 gives a single affine map
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::identity;
};

/// Per-call activations kept for the backward pass. `values[0]` is the input,
/// `values[l + 1]` the post-activation output of layer l.
template <typename Scalar>
struct FeedForwardCache {
  std::vector<Matrix<Scalar>> values;
};

namespace detail {

template <typename Scalar>
void activate(Matrix<Scalar>& z, Activation act) {
  switch (act) {
    case Activation::relu: z = z.cwiseMax(Scalar(0)); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
    case Activation::identity: break;
  }
}

/// Multiplies dy in place by the activation derivative expressed through the output y.
template <typename Scalar>
void activation_backward(Matrix<Scalar>& dy, const Matrix<Scalar>& y, Activation act) {
  switch (act) {
    case Activation::relu: dy = (y.array() > Scalar(0)).select(dy, Scalar(0)); break;
    case Activation::tanh: dy.array() *= Scalar(1) - y.array().square(); break;
    case Activation::identity: break;
  }
}

}  // namespace detail

/// Stack of affine layers. Holds only the architecture and the indices of its
/// tensors; weights live in a ParameterSet passed to every call.
template <typename Scalar>
class FeedForward {
 public:
  FeedForward() = default;

  FeedForward(const FeedForwardSpec& spec, ParameterSet<Scalar>& params, const std::string& prefix)
      : spec_(spec) {
    if (spec.input_dim <= 0 || spec.output_dim <= 0 || spec.hidden_size <= 0 ||
        spec.num_hidden_layers < 0) {
      throw std::invalid_argument("FeedForward: dimensions must be positive");
    }
    int in = spec.input_dim;
    for (int l = 0; l <= spec.num_hidden_layers; ++l) {
      const int out = l == spec.num_hidden_layers ? spec.output_dim : spec.hidden_size;
      const std::string tag = prefix + "l" + std::to_string(l);
      weights_.push_back(params.add(tag + ".weight", out, in));
      biases_.push_back(params.add(tag + ".bias", out, 1));
      in = out;
    }
  }

  const FeedForwardSpec& spec() const { return spec_; }
  int layers() const { return static_cast<int>(weights_.size()); }

  /// Fan-in scaled uniform initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  void initialize(ParameterSet<Scalar>& params, Rng& rng) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      auto& w = params[weights_[l]];
      const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(w.cols()));
      w = uniform<Scalar>(w.rows(), w.cols(), -bound, bound, rng);
      auto& b = params[biases_[l]];
      b = uniform<Scalar>(b.rows(), 1, -bound, bound, rng);
    }
  }

  Matrix<Scalar> forward(const ParameterSet<Scalar>& params, const Matrix<Scalar>& x,
                         FeedForwardCache<Scalar>* cache = nullptr) const {
    require_dim(x.rows(), spec_.input_dim, "FeedForward::forward input");
    if (cache) {
      cache->values.clear();
      cache->values.push_back(x);
    }
    Matrix<Scalar> h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Matrix<Scalar> z(params[weights_[l]].rows(), h.cols());
      z.noalias() = params[weights_[l]] * h;
      z.colwise() += params[biases_[l]].col(0);
      detail::activate(z, activation_(l));
      h = std::move(z);
      if (cache) cache->values.push_back(h);
    }
    return h;
  }

  /// Backpropagates dy; accumulates parameter gradients into `grads` when
  /// given and returns the gradient with respect to the input.
  Matrix<Scalar> backward(const ParameterSet<Scalar>& params, const FeedForwardCache<Scalar>& cache,
                          Matrix<Scalar> dy, ParameterSet<Scalar>* grads) const {
    for (std::size_t l = weights_.size(); l-- > 0;) {
      detail::activation_backward(dy, cache.values[l + 1], activation_(l));
      if (grads) {
        (*grads)[weights_[l]].noalias() += dy * cache.values[l].transpose();
        (*grads)[biases_[l]] += dy.rowwise().sum();
      }
      Matrix<Scalar> dx(params[weights_[l]].cols(), dy.cols());
      dx.noalias() = params[weights_[l]].transpose() * dy;
      dy = std::move(dx);
    }
    return dy;
  }

  std::size_t weight_index(int layer) const { return weights_.at(static_cast<std::size_t>(layer)); }
  std::size_t bias_index(int layer) const { return biases_.at(static_cast<std::size_t>(layer)); }

 private:
  Activation activation_(std::size_t l) const {
    return l + 1 == weights_.size() ? spec_.output_activation : spec_.hidden_activation;
  }

  FeedForwardSpec spec_;
  std::vector<std::size_t> weights_;
  std::vector<std::size_t> biases_;
};

}  // namespace srl::nets
