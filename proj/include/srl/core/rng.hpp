#pragma once

#include "srl/core/types.hpp"

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace srl {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a stream label.
/// SplitMix64 finalizer over (seed, stream) so nearby seeds do not share prefixes.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename Scalar>
Matrix<Scalar> standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix<Scalar> out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(dist(rng));
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> uniform(Eigen::Index rows, Eigen::Index cols, Scalar low, Scalar high, Rng& rng) {
  std::uniform_real_distribution<double> dist(static_cast<double>(low), static_cast<double>(high));
  Matrix<Scalar> out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(dist(rng));
  }
  return out;
}

inline std::string save_rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline Rng load_rng_state(const std::string& state) {
  Rng rng;
  std::istringstream is(state);
  is >> rng;
  return rng;
}

}  // namespace srl
