#pragma once

#include "srl/core/rng.hpp"
#include "srl/core/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srl::nets {

/// Flat ordered collection of named tensors. Networks register their weights
/// here and address them by index; online and target copies share the layout.
template <typename Scalar>
class ParameterSet {
 public:
  using MatrixType = Matrix<Scalar>;

  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    if (find(name)) throw std::invalid_argument("ParameterSet: duplicate tensor '" + name + "'");
    names_.push_back(std::move(name));
    tensors_.push_back(MatrixType::Zero(rows, cols));
    return tensors_.size() - 1;
  }

  std::size_t size() const { return tensors_.size(); }
  bool empty() const { return tensors_.empty(); }

  MatrixType& operator[](std::size_t i) { return tensors_[i]; }
  const MatrixType& operator[](std::size_t i) const { return tensors_[i]; }

  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i;
    }
    return std::nullopt;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
  }

  bool same_layout(const ParameterSet& other) const {
    if (names_ != other.names_) return false;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
      if (tensors_[i].rows() != other.tensors_[i].rows() ||
          tensors_[i].cols() != other.tensors_[i].cols()) {
        return false;
      }
    }
    return true;
  }

  ParameterSet zeros_like() const {
    ParameterSet out = *this;
    out.set_zero();
    return out;
  }

  void set_zero() {
    for (auto& t : tensors_) t.setZero();
  }

  /// Element k of the concatenation of all tensors (column-major within each).
  Scalar& flat(Eigen::Index k) {
    for (auto& t : tensors_) {
      if (k < t.size()) return t.data()[k];
      k -= t.size();
    }
    throw std::out_of_range("ParameterSet::flat");
  }
  Scalar flat(Eigen::Index k) const { return const_cast<ParameterSet&>(*this).flat(k); }

  bool all_finite() const {
    for (const auto& t : tensors_) {
      if (!t.allFinite()) return false;
    }
    return true;
  }

  Scalar squared_norm() const {
    Scalar s = 0;
    for (const auto& t : tensors_) s += t.squaredNorm();
    return s;
  }

  ParameterSet& operator+=(const ParameterSet& other) {
    require_same_layout(other, "operator+=");
    for (std::size_t i = 0; i < tensors_.size(); ++i) tensors_[i] += other.tensors_[i];
    return *this;
  }

  ParameterSet& operator*=(Scalar s) {
    for (auto& t : tensors_) t *= s;
    return *this;
  }

  template <typename Other>
  ParameterSet<Other> cast() const {
    ParameterSet<Other> out;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
      const auto idx = out.add(names_[i], tensors_[i].rows(), tensors_[i].cols());
      out[idx] = tensors_[i].template cast<Other>();
    }
    return out;
  }

  /// FNV-1a over the raw bytes; used to detect any parameter change.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& t : tensors_) {
      const auto* bytes = reinterpret_cast<const unsigned char*>(t.data());
      for (std::size_t b = 0; b < static_cast<std::size_t>(t.size()) * sizeof(Scalar); ++b) {
        h = (h ^ bytes[b]) * 1099511628211ULL;
      }
    }
    return h;
  }

  void require_same_layout(const ParameterSet& other, const char* op) const {
    if (!same_layout(other)) {
      throw DimensionError(std::string("ParameterSet::") + op + ": layout mismatch");
    }
  }

 private:
  std::vector<std::string> names_;
  std::vector<MatrixType> tensors_;
};

/// target <- tau * online + (1 - tau) * target, elementwise.
template <typename Scalar>
void ema_update(ParameterSet<Scalar>& target, const ParameterSet<Scalar>& online, Scalar tau) {
  if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("ema_update: tau must lie in [0, 1]");
  target.require_same_layout(online, "ema_update");
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (tau == Scalar(1)) {
      target[i] = online[i];
    } else {
      target[i] = tau * online[i] + (Scalar(1) - tau) * target[i];
    }
  }
}

/// Adam with bias correction; one instance per parameter set.
template <typename Scalar>
class Adam {
 public:
  explicit Adam(const ParameterSet<Scalar>& params, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(params.zeros_like()),
        v_(params.zeros_like()) {}

  double learning_rate() const { return lr_; }
  std::int64_t steps() const { return t_; }

  /// Applies one descent step. When max_norm > 0 the gradient is rescaled to
  /// at most that global L2 norm first.
  void step(ParameterSet<Scalar>& params, const ParameterSet<Scalar>& grads, double max_norm = 0) {
    params.require_same_layout(grads, "Adam::step");
    Scalar scale = 1;
    if (max_norm > 0) {
      const double norm = std::sqrt(static_cast<double>(grads.squared_norm()));
      if (norm > max_norm) scale = static_cast<Scalar>(max_norm / (norm + 1e-12));
    }
    ++t_;
    const Scalar b1 = static_cast<Scalar>(beta1_);
    const Scalar b2 = static_cast<Scalar>(beta2_);
    const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(beta1_, static_cast<double>(t_)));
    const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(beta2_, static_cast<double>(t_)));
    const Scalar step = static_cast<Scalar>(lr_);
    const Scalar eps = static_cast<Scalar>(eps_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto g = (scale * grads[i].array()).eval();
      m_[i].array() = b1 * m_[i].array() + (Scalar(1) - b1) * g;
      v_[i].array() = b2 * v_[i].array() + (Scalar(1) - b2) * g.square();
      params[i].array() -= step * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  ParameterSet<Scalar> m_, v_;
};

}  // namespace srl::nets
