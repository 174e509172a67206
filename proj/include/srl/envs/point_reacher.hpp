#pragma once

#include "srl/core/rng.hpp"
#include "srl/envs/environment.hpp"

namespace srl::envs {

/// Velocity-controlled point mass in [-1, 1]^2 chasing a random target.
/// State [px, py, vx, vy, tx, ty]; the velocity relaxes toward the
/// commanded one: v' = v + gain (a - v), p' = clip(p + v' dt).
class PointReacher final : public Environment {
 public:
  static constexpr double gain = 0.5;
  static constexpr double target_range = 0.8;

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "reacher-point"; }

  Vector<double> reset(std::uint64_t seed) override {
    Rng rng(seed);
    state_ = Vector<double>::Zero(6);
    state_.head<2>() = uniform<double>(2, 1, -1.0, 1.0, rng);
    state_.tail<2>() = uniform<double>(2, 1, -target_range, target_range, rng);
    t_ = 0;
    return state_;
  }

  void set_state(const Vector<double>& s) {
    require_dim(s.size(), 6, "PointReacher::set_state");
    state_ = s;
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<PointReacher>(*this); }

 protected:
  StepResult step_clipped(const Vector<double>& action) override {
    const Eigen::Vector2d v = state_.segment<2>(2) + gain * (action - state_.segment<2>(2));
    const Eigen::Vector2d p = (state_.head<2>() + v * spec_.dt).cwiseMax(-1.0).cwiseMin(1.0);
    state_.head<2>() = p;
    state_.segment<2>(2) = v;
    ++t_;
    const double reward = -(p - state_.tail<2>()).norm() - 0.01 * action.squaredNorm();
    return {state_, reward, false, t_ >= spec_.max_episode_length};
  }

 private:
  EnvSpec spec_{6, 2, 100, 0.1};
  Vector<double> state_ = Vector<double>::Zero(6);
  int t_ = 0;
};

}  // namespace srl::envs
