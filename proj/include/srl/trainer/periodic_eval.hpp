#pragma once

#include "srl/envs/execute_sequence.hpp"
#include "srl/trainer/agent.hpp"

#include <functional>
#include <numeric>

namespace srl::trainer {

/// Produces `k` primitive actions for an observation. `previous` is the last
/// executed action of the episode (zero at the start).
using SequenceController =
    std::function<std::vector<Vector<double>>(const Vector<double>& observation, int k, const Vector<double>& previous)>;

/// Number of actions to execute before the next observation.
using DecisionSchedule = std::function<int(Rng&)>;

struct EpisodeStats {
  std::vector<double> returns;
  std::uint64_t decisions = 0;

  double mean() const {
    if (returns.empty()) throw std::logic_error("EpisodeStats: no episodes");
    return std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  }
  double standard_error() const {
    const auto n = static_cast<double>(returns.size());
    if (n < 2) return 0.0;
    const double m = mean();
    double ss = 0;
    for (double r : returns) ss += (r - m) * (r - m);
    return std::sqrt(ss / (n - 1) / n);
  }
};

/// Seed of evaluation episode `episode` under base seed `seed`.
inline std::uint64_t eval_episode_seed(std::uint64_t seed, int episode) {
  return derive_seed(seed, 0x65760000ULL + static_cast<std::uint64_t>(episode));
}

/// Runs `episodes` episodes. At each decision the schedule picks k, the
/// controller emits k actions and they run open-loop; only then is the next
/// state observed. Episode e resets with eval_episode_seed(seed, first + e);
/// the schedule draws from its own stream.
inline EpisodeStats run_episodes(envs::Environment& env, const SequenceController& controller,
                                 const DecisionSchedule& schedule, int episodes, std::uint64_t seed,
                                 int first = 0) {
  if (episodes < 1) throw std::invalid_argument("run_episodes: episodes must be >= 1");
  EpisodeStats stats;
  Rng schedule_rng(derive_seed(seed, 0x5343ULL + static_cast<std::uint64_t>(first)));
  for (int e = first; e < first + episodes; ++e) {
    Vector<double> obs = env.reset(eval_episode_seed(seed, e));
    Vector<double> previous = Vector<double>::Zero(env.spec().action_dim);
    double total = 0;
    for (;;) {
      const int k = schedule(schedule_rng);
      if (k < 1) throw std::invalid_argument("run_episodes: schedule produced k < 1");
      const auto actions = controller(obs, k, previous);
      if (static_cast<int>(actions.size()) != k) throw std::logic_error("run_episodes: controller returned wrong length");
      ++stats.decisions;
      const auto out = envs::execute_sequence(env, actions, k);
      for (double r : out.rewards) total += r;  // per step, so grouping by k cannot matter
      previous = actions[out.steps() - 1];
      obs = out.final_state;
      if (out.finished()) break;
    }
    stats.returns.push_back(total);
  }
  return stats;
}

inline DecisionSchedule fixed_schedule(int k) {
  return [k](Rng&) { return k; };
}

/// Deterministic sequence controller of an agent.
inline SequenceController sequence_controller(const Agent& agent) {
  return [&agent](const Vector<double>& obs, int k, const Vector<double>& previous) {
    Rng unused(0);
    return agent.act(obs, k, true, unused, &previous);
  };
}

/// One deterministic action, repeated k times.
inline SequenceController repeat_controller(const Agent& agent) {
  return [&agent](const Vector<double>& obs, int k, const Vector<double>& previous) {
    Rng unused(0);
    const auto a = agent.act(obs, 1, true, unused, &previous).front();
    return std::vector<Vector<double>>(static_cast<std::size_t>(k), a);
  };
}

/// Uniform random actions, ignoring the observation.
inline SequenceController random_controller(int action_dim, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng, action_dim](const Vector<double>&, int k, const Vector<double>&) {
    std::vector<Vector<double>> out;
    for (int i = 0; i < k; ++i) out.push_back(uniform<double>(action_dim, 1, -1.0, 1.0, *rng));
    return out;
  };
}

/// Mean undiscounted return of the deterministic policy, observing every
/// J_eval-th state.
inline EpisodeStats periodic_eval(const Agent& agent, envs::Environment& env, int J_eval, int episodes,
                                  std::uint64_t seed) {
  return run_episodes(env, sequence_controller(agent), fixed_schedule(J_eval), episodes, seed);
}

}  // namespace srl::trainer
