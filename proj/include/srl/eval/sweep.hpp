#pragma once

#include "srl/eval/score_curve.hpp"
#include "srl/trainer/periodic_eval.hpp"

namespace srl::eval {

/// `sequence` unrolls the policy k steps; `repeat` holds its first action for k steps.
enum class SweepMode { sequence, repeat };

NLOHMANN_JSON_SERIALIZE_ENUM(SweepMode, {{SweepMode::sequence, "sequence"}, {SweepMode::repeat, "repeat"}})

inline trainer::SequenceController controller_for(const trainer::Agent& agent, SweepMode mode) {
  return mode == SweepMode::sequence ? trainer::sequence_controller(agent) : trainer::repeat_controller(agent);
}

/// Generic sweep: `episodes` episodes per grid point, observing every k-th state.
inline ScoreCurve sweep_controller(envs::Environment& env, const trainer::SequenceController& controller,
                                   const std::vector<int>& grid, int episodes, std::uint64_t seed) {
  ScoreCurve curve;
  curve.asl_grid = grid;
  curve.episodes_per_point = episodes;
  for (int k : grid) {
    if (k < 1) throw std::invalid_argument("asl_sweep: ASL values must be positive");
    const auto stats = trainer::run_episodes(env, controller, trainer::fixed_schedule(k), episodes, seed);
    curve.mean_returns.push_back(stats.mean());
    curve.std_errors.push_back(stats.standard_error());
  }
  curve.validate();
  return curve;
}

inline ScoreCurve asl_sweep(const trainer::Agent& agent, envs::Environment& env, const std::vector<int>& grid,
                            int episodes, SweepMode mode, std::uint64_t seed) {
  return sweep_controller(env, controller_for(agent, mode), grid, episodes, seed);
}

/// Mean return of uniformly random actions; the lower FAS anchor.
inline trainer::EpisodeStats random_policy_stats(envs::Environment& env, int episodes, std::uint64_t seed) {
  return trainer::run_episodes(env, trainer::random_controller(env.spec().action_dim, derive_seed(seed, 77)),
                               trainer::fixed_schedule(1), episodes, seed);
}

struct StochasticEvalResult {
  trainer::EpisodeStats stats;
  std::vector<std::uint64_t> k_histogram;  // index k - 1
  double mean() const { return stats.mean(); }
};

/// After each decision k ~ U{1..max_k}; the first k actions of a fresh
/// sequence (or k repeats) run before the next observation.
inline StochasticEvalResult stochastic_timestep_eval(const trainer::Agent& agent, envs::Environment& env,
                                                     int episodes, std::uint64_t seed,
                                                     SweepMode mode = SweepMode::sequence, int max_k = 16) {
  if (max_k < 1) throw std::invalid_argument("stochastic_timestep_eval: max_k must be >= 1");
  StochasticEvalResult out;
  out.k_histogram.assign(static_cast<std::size_t>(max_k), 0);
  auto* hist = &out.k_histogram;
  trainer::DecisionSchedule schedule = [hist, max_k](Rng& rng) {
    const int k = std::uniform_int_distribution<int>(1, max_k)(rng);
    ++(*hist)[static_cast<std::size_t>(k - 1)];
    return k;
  };
  out.stats = trainer::run_episodes(env, controller_for(agent, mode), schedule, episodes, seed);
  return out;
}

}  // namespace srl::eval
