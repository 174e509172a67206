#pragma once

#include "srl/eval/sweep.hpp"

namespace srl::eval {

/// One-step predictor used to imagine intermediate states at decision time.
class StepModel {
 public:
  virtual ~StepModel() = default;
  /// Called once per decision, before any prediction, with the real observation.
  virtual void begin_decision(const Vector<double>& observation) { (void)observation; }
  virtual Vector<double> predict(const Vector<double>& state, const Vector<double>& action) = 0;
};

/// The agent's live (online) dynamics model.
class LearnedStepModel final : public StepModel {
 public:
  explicit LearnedStepModel(const model::DynamicsModel<Real>& m) : model_(m) {}
  Vector<double> predict(const Vector<double>& s, const Vector<double>& a) override {
    return model_.predict(s.cast<Real>(), a.cast<Real>()).cast<double>();
  }

 private:
  const model::DynamicsModel<Real>& model_;
};

/// Exact dynamics: a clone of the real environment taken at each decision
/// and stepped forward, so imagined states equal real ones.
class GroundTruthStepModel final : public StepModel {
 public:
  explicit GroundTruthStepModel(const envs::Environment& env) : env_(env) {}
  void begin_decision(const Vector<double>&) override { sim_ = env_.clone(); }
  Vector<double> predict(const Vector<double>&, const Vector<double>& action) override {
    if (!sim_) throw std::logic_error("GroundTruthStepModel: predict before begin_decision");
    return sim_->step(action).state;
  }

 private:
  const envs::Environment& env_;
  std::unique_ptr<envs::Environment> sim_;
};

struct PlanningResult {
  ScoreCurve curve;
  std::vector<std::uint64_t> model_calls;  // per grid point
  std::vector<std::uint64_t> decisions;    // per grid point
  std::vector<std::string> aborted;        // diagnostics of aborted episodes
};

/// Model-based online planning: at each observation, query the one-step
/// policy, imagine the next state with the model, and repeat k times; the k
/// actions then run open-loop. k - 1 model calls per decision.
inline PlanningResult online_planning_eval(const trainer::Agent& agent, StepModel& model, envs::Environment& env,
                                           const std::vector<int>& grid, int episodes, std::uint64_t seed) {
  PlanningResult out;
  out.curve.asl_grid = grid;
  out.curve.episodes_per_point = episodes;
  std::uint64_t calls = 0;
  trainer::SequenceController controller = [&](const Vector<double>& obs, int k, const Vector<double>& previous) {
    model.begin_decision(obs);
    std::vector<Vector<double>> actions;
    Vector<double> s = obs;
    Vector<double> prev = previous;
    Rng unused(0);
    for (int j = 0; j < k; ++j) {
      actions.push_back(agent.act(s, 1, true, unused, &prev).front());
      prev = actions.back();
      if (j + 1 < k) {
        s = model.predict(s, actions.back());
        ++calls;
        if (!s.allFinite()) throw NumericError("online planning: non-finite imagined state", j + 1);
      }
    }
    return actions;
  };
  for (int k : grid) {
    calls = 0;
    std::uint64_t decisions = 0;
    std::vector<double> returns;
    for (int e = 0; e < episodes; ++e) {
      const std::uint64_t calls_before = calls;
      try {
        const auto stats = trainer::run_episodes(env, controller, trainer::fixed_schedule(k), 1, seed, e);
        returns.push_back(stats.returns.front());
        decisions += stats.decisions;
      } catch (const NumericError& err) {
        calls = calls_before;
        out.aborted.push_back("k=" + std::to_string(k) + " episode " + std::to_string(e) + ": " + err.what());
      }
    }
    trainer::EpisodeStats stats{returns, decisions};
    out.curve.mean_returns.push_back(returns.empty() ? std::nan("") : stats.mean());
    out.curve.std_errors.push_back(stats.standard_error());
    out.model_calls.push_back(calls);
    out.decisions.push_back(decisions);
  }
  return out;
}

}  // namespace srl::eval
