#pragma once

#include "srl/core/rng.hpp"
#include "srl/envs/environment.hpp"

#include <vector>

namespace srl::envs {

/// s' = A s + B (scale * a), reward -(s'Qs + u'Ru) on the pre-step state.
struct LinearSystemParams {
  Matrix<double> A;
  Matrix<double> B;
  Matrix<double> Q;
  Matrix<double> R;
  double action_scale = 1.0;
  double init_range = 1.0;  // initial state ~ U[-init_range, init_range]^d_s
  int horizon = 100;

  /// The bundled stable 3-state, 2-input system.
  static LinearSystemParams bundled() {
    LinearSystemParams p;
    p.A.resize(3, 3);
    p.A << 0.98, 0.1, 0.0,  //
        0.0, 0.98, 0.1,     //
        0.0, 0.0, 0.95;
    p.B.resize(3, 2);
    p.B << 0.0, 0.0,  //
        0.1, 0.0,     //
        0.0, 0.1;
    p.Q = Matrix<double>::Identity(3, 3);
    p.R = 0.1 * Matrix<double>::Identity(2, 2);
    return p;
  }
};

class LinearSystem final : public Environment {
 public:
  explicit LinearSystem(LinearSystemParams p = LinearSystemParams::bundled()) : p_(std::move(p)) {
    const auto n = p_.A.rows();
    if (p_.A.cols() != n || p_.B.rows() != n || p_.Q.rows() != n || p_.Q.cols() != n ||
        p_.R.rows() != p_.B.cols() || p_.R.cols() != p_.B.cols()) {
      throw DimensionError("LinearSystem: inconsistent matrix shapes");
    }
    spec_ = {static_cast<int>(n), static_cast<int>(p_.B.cols()), p_.horizon, 1.0};
    state_ = Vector<double>::Zero(n);
  }

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "linear"; }
  const LinearSystemParams& params() const { return p_; }

  Vector<double> reset(std::uint64_t seed) override {
    Rng rng(seed);
    state_ = uniform<double>(spec_.state_dim, 1, -p_.init_range, p_.init_range, rng);
    t_ = 0;
    return state_;
  }

  void set_state(const Vector<double>& s) {
    require_dim(s.size(), spec_.state_dim, "LinearSystem::set_state");
    state_ = s;
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<LinearSystem>(*this); }

 protected:
  StepResult step_clipped(const Vector<double>& action) override {
    const Vector<double> u = p_.action_scale * action;
    const double cost = state_.dot(p_.Q * state_) + u.dot(p_.R * u);
    state_ = p_.A * state_ + p_.B * u;
    ++t_;
    return {state_, -cost, false, t_ >= spec_.max_episode_length};
  }

 private:
  LinearSystemParams p_;
  EnvSpec spec_;
  Vector<double> state_;
  int t_ = 0;
};

/// Finite-horizon LQR solution: cost-to-go matrices P_0..P_T and gains K_t
/// with u_t = -K_t s_t, ignoring the action box.
struct RiccatiSolution {
  std::vector<Matrix<double>> P;  // size horizon + 1, P[horizon] = 0
  std::vector<Matrix<double>> K;  // size horizon, in the env's u units

  /// Optimal return from s0 (unconstrained inputs).
  double optimal_return(const Vector<double>& s0) const { return -s0.dot(P.front() * s0); }

  /// Expected optimal return for s0 ~ U[-r, r]^n.
  double expected_optimal_return(double r) const {
    return -P.front().trace() * r * r / 3.0;
  }
};

inline RiccatiSolution solve_riccati(const LinearSystemParams& p) {
  const auto n = p.A.rows();
  RiccatiSolution sol;
  sol.P.assign(static_cast<std::size_t>(p.horizon) + 1, Matrix<double>::Zero(n, n));
  sol.K.assign(static_cast<std::size_t>(p.horizon), Matrix<double>());
  for (int t = p.horizon - 1; t >= 0; --t) {
    const Matrix<double>& next = sol.P[static_cast<std::size_t>(t) + 1];
    const Matrix<double> gram = p.R + p.B.transpose() * next * p.B;
    const Matrix<double> K = gram.ldlt().solve(p.B.transpose() * next * p.A);
    const Matrix<double> closed = p.A - p.B * K;
    Matrix<double> P = p.Q + K.transpose() * p.R * K + closed.transpose() * next * closed;
    sol.P[static_cast<std::size_t>(t)] = 0.5 * (P + P.transpose());
    sol.K[static_cast<std::size_t>(t)] = K;
  }
  return sol;
}

}  // namespace srl::envs
