#pragma once

#include "srl/nets/parameter_set.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

namespace srl::nets {

/// Loss callback for gradient checking: returns the loss at `params` and, when
/// `grads` is non-null, accumulates the analytic gradient into it.
template <typename Scalar>
using LossFn = std::function<Scalar(const ParameterSet<Scalar>& params, ParameterSet<Scalar>* grads)>;

struct GradCheckResult {
  double max_relative_error = 0;
  Eigen::Index worst_index = -1;
  double analytic_at_worst = 0;
  double numeric_at_worst = 0;
  Eigen::Index checked = 0;
};

/// Compares analytic gradients with central differences on a sampled subset
/// of parameter entries (all of them when `max_samples` covers the set).
/// Relative error per entry is |analytic - numeric| / (|analytic| + |numeric| + 1e-8).
template <typename Scalar>
GradCheckResult grad_check(const LossFn<Scalar>& loss, ParameterSet<Scalar> params, Scalar epsilon,
                           Eigen::Index max_samples = 200, std::uint64_t seed = 0) {
  ParameterSet<Scalar> grads = params.zeros_like();
  const Scalar base = loss(params, &grads);
  if (!std::isfinite(static_cast<double>(base))) throw NumericError("grad_check: non-finite loss");

  const Eigen::Index total = params.parameter_count();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (total > max_samples) {
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(max_samples));
  }

  GradCheckResult result;
  for (const Eigen::Index k : idx) {
    const Scalar saved = params.flat(k);
    params.flat(k) = saved + epsilon;
    const Scalar up = loss(params, nullptr);
    params.flat(k) = saved - epsilon;
    const Scalar down = loss(params, nullptr);
    params.flat(k) = saved;
    if (!std::isfinite(static_cast<double>(up)) || !std::isfinite(static_cast<double>(down))) {
      throw NumericError("grad_check: non-finite loss under perturbation");
    }
    const double numeric = (static_cast<double>(up) - static_cast<double>(down)) / (2.0 * epsilon);
    const double analytic = static_cast<double>(grads.flat(k));
    const double rel = std::abs(analytic - numeric) / (std::abs(analytic) + std::abs(numeric) + 1e-8);
    ++result.checked;
    if (rel > result.max_relative_error || result.worst_index < 0) {
      result.max_relative_error = rel;
      result.worst_index = k;
      result.analytic_at_worst = analytic;
      result.numeric_at_worst = numeric;
    }
  }
  return result;
}

}  // namespace srl::nets
