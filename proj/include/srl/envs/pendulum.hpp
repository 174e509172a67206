#pragma once

#include "srl/core/rng.hpp"
#include "srl/envs/environment.hpp"

#include <numbers>

namespace srl::envs {

/// Torque-limited swing-up. Observation [cos th, sin th, th_dot]; th = 0 is
/// the upright goal. Semi-implicit Euler with velocity clipping.
class Pendulum final : public Environment {
 public:
  static constexpr double g = 10.0;
  static constexpr double m = 1.0;
  static constexpr double l = 1.0;
  static constexpr double max_torque = 2.0;
  static constexpr double max_speed = 8.0;

  Pendulum() = default;

  const EnvSpec& spec() const override { return spec_; }
  std::string name() const override { return "pendulum"; }

  Vector<double> reset(std::uint64_t seed) override {
    Rng rng(seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> speed(-1.0, 1.0);
    theta_ = angle(rng);
    theta_dot_ = speed(rng);
    t_ = 0;
    return observe();
  }

  /// Direct state access for tests and oracles.
  void set_state(double theta, double theta_dot) {
    theta_ = theta;
    theta_dot_ = theta_dot;
  }
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

  static double angle_normalize(double x) {
    const double two_pi = 2 * std::numbers::pi;
    return std::fmod(std::fmod(x + std::numbers::pi, two_pi) + two_pi, two_pi) - std::numbers::pi;
  }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<Pendulum>(*this); }

 protected:
  StepResult step_clipped(const Vector<double>& action) override {
    const double u = max_torque * action(0);
    const double th = angle_normalize(theta_);
    const double cost = th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;
    double new_dot = theta_dot_ + (3 * g / (2 * l) * std::sin(theta_) + 3.0 / (m * l * l) * u) * spec_.dt;
    new_dot = std::clamp(new_dot, -max_speed, max_speed);
    theta_ += new_dot * spec_.dt;
    theta_dot_ = new_dot;
    ++t_;
    return {observe(), -cost, false, t_ >= spec_.max_episode_length};
  }

 private:
  Vector<double> observe() const {
    Vector<double> s(3);
    s << std::cos(theta_), std::sin(theta_), theta_dot_;
    return s;
  }

  EnvSpec spec_{3, 1, 200, 0.05};
  double theta_ = 0;
  double theta_dot_ = 0;
  int t_ = 0;
};

}  // namespace srl::envs
