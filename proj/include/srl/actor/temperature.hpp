#pragma once

#include "srl/nets/parameter_set.hpp"

#include <span>

namespace srl::actor {

/// Entropy temperature, learned through its logarithm so alpha stays positive.
template <typename Scalar>
class Temperature {
 public:
  Temperature() : Temperature(Scalar(0.1), Scalar(-1)) {}

  Temperature(Scalar initial_alpha, Scalar target_entropy) : target_entropy_(target_entropy) {
    if (!(initial_alpha > 0)) throw std::invalid_argument("Temperature: alpha must be positive");
    params_.add("log_alpha", 1, 1);
    params_[0](0, 0) = std::log(initial_alpha);
  }

  Scalar alpha() const { return std::exp(params_[0](0, 0)); }
  Scalar log_alpha() const { return params_[0](0, 0); }
  Scalar target_entropy() const { return target_entropy_; }
  void set_target_entropy(Scalar t) { target_entropy_ = t; }

  nets::ParameterSet<Scalar>& params() { return params_; }
  const nets::ParameterSet<Scalar>& params() const { return params_; }

 private:
  nets::ParameterSet<Scalar> params_;
  Scalar target_entropy_;
};

/// Mean over positions of -alpha * (log pi + target_entropy). With alpha = exp(log_alpha)
/// the derivative with respect to log_alpha equals the loss itself.
template <typename Scalar>
Scalar temperature_loss(Scalar alpha, std::span<const Scalar> log_probs, Scalar target_entropy) {
  if (log_probs.empty()) throw std::invalid_argument("temperature_loss: no log-probabilities");
  Scalar sum = 0;
  for (Scalar lp : log_probs) sum += lp + target_entropy;
  return -alpha * sum / static_cast<Scalar>(log_probs.size());
}

/// Gradient of temperature_loss with respect to log alpha.
template <typename Scalar>
Scalar temperature_gradient(Scalar alpha, std::span<const Scalar> log_probs, Scalar target_entropy) {
  return temperature_loss(alpha, log_probs, target_entropy);
}

}  // namespace srl::actor
