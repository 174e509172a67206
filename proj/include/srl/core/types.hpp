#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace srl {

/// Column-major dense matrix; batched quantities are stored feature x batch.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Training precision.
using Real = float;

/// Raised when a quantity that must stay finite (loss, prediction, action) is not.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, int step = -1)
      : std::runtime_error(what), step_(step) {}

  /// Index of the failing step in a multi-step computation, or -1.
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

inline void require_dim(Eigen::Index got, Eigen::Index expected, const char* what) {
  if (got != expected) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace srl
