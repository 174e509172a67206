// Acceptance suite: one PASS/FAIL line per criterion. Criteria 5, 6 and 9
// train pendulum agents and take the bulk of the runtime.

#include "toy_fixtures.hpp"

#include "srl/envs/registry.hpp"
#include "srl/eval/online_planning.hpp"
#include "srl/eval/report.hpp"
#include "srl/eval/sweep.hpp"
#include "srl/latent/temporal_consistency.hpp"
#include "srl/nets/grad_check.hpp"
#include "srl/trainer/trainer.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace srl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

using Params = nets::ParameterSet<double>;

// ---------------------------------------------------------------- 1

Outcome gradient_suite() {
  const double tol = 1e-2;
  std::vector<std::pair<std::string, double>> worst;

  const auto batch = toy::batch();
  {
    const auto model = toy::model();
    nets::LossFn<double> loss = [&](const Params& p, Params* g) { return model.loss(p, batch, g); };
    worst.emplace_back("model", nets::grad_check(loss, model.params(), 1e-6, 1000).max_relative_error);
  }
  {
    const auto critic = toy::critic();
    Rng rng(8);
    const RowVector<double> target = standard_normal<double>(1, batch.size(), rng);
    double w = 0;
    for (int k = 0; k < 2; ++k) {
      nets::LossFn<double> loss = [&](const Params& p, Params* g) {
        std::array<const Params*, 2> params{&critic.params(0), &critic.params(1)};
        std::array<Params*, 2> grads{nullptr, nullptr};
        params[static_cast<std::size_t>(k)] = &p;
        grads[static_cast<std::size_t>(k)] = g;
        return critic::critic_loss(critic, params, batch, target, grads);
      };
      w = std::max(w, nets::grad_check(loss, critic.params(k), 1e-6, 1000).max_relative_error);
    }
    worst.emplace_back("critic", w);
  }
  {
    const auto policy = toy::policy();
    const auto critic = toy::critic();
    const auto model = toy::model();
    Rng rng(77);
    const auto noise = policy.draw_noise(2, batch.size(), rng);  // J = 2
    nets::LossFn<double> loss = [&](const Params& p, Params* g) {
      return actor::actor_loss<double>(policy, p, critic, &model, batch.states, 0.3, noise, CriticReduction::min, g)
          .loss;
    };
    worst.emplace_back("actor", nets::grad_check(loss, policy.params(), 1e-6, 1000).max_relative_error);
  }
  {
    Rng rng(1);
    const latent::Encoder<double> enc({toy::kStateDim, toy::kStateDim, toy::kHidden, 2}, rng);
    const model::DynamicsModel<double> lm({toy::kStateDim, toy::kActionDim, toy::kHidden, 2, false}, rng);
    latent::LatentRolloutBatch<double> b;  // H = 2
    for (int h = 0; h <= 2; ++h) b.observations.push_back(standard_normal<double>(toy::kStateDim, 6, rng));
    for (int h = 0; h < 2; ++h) b.actions.push_back(uniform<double>(toy::kActionDim, 6, -1, 1, rng));
    Params online = enc.params();
    for (std::size_t i = 0; i < online.size(); ++i) {
      online[i] += 0.1 * standard_normal<double>(online[i].rows(), online[i].cols(), rng);
    }
    nets::LossFn<double> enc_loss = [&](const Params& p, Params* g) {
      return latent::temporal_consistency_loss(enc, p, lm, lm.params(), b, 0.9, g, nullptr).loss;
    };
    nets::LossFn<double> lm_loss = [&](const Params& p, Params* g) {
      return latent::temporal_consistency_loss(enc, online, lm, p, b, 0.9, nullptr, g).loss;
    };
    worst.emplace_back("consistency", std::max(nets::grad_check(enc_loss, online, 1e-6, 1000).max_relative_error,
                                               nets::grad_check(lm_loss, lm.params(), 1e-6, 1000).max_relative_error));
  }
  Outcome o{true, "max relative error:"};
  for (const auto& [name, err] : worst) {
    o.pass = o.pass && err <= tol;
    o.detail += fmt(" %s %.2e", name.c_str(), err);
  }
  return o;
}

// ---------------------------------------------------------------- 2

/// Deterministic 5-state chain s -> s+1, the last state terminal, with
/// reward c_s + b a. The policy is a fixed, untrained squashed Gaussian.
Outcome critic_chain() {
  constexpr int S = 5;
  const std::array<double, S> c{0.5, -0.2, 0.3, 1.0, 0.8};
  const double b = 0.6, gamma = 0.9, alpha = 0.2;

  Rng rng(2024);
  const actor::SequencePolicy<double> policy({S, 1, 16, 2, -20.0, 2.0}, rng);
  critic::TwinCritic<double> critic({S, 1, 64, 2}, rng);

  // Oracle: per-state moments of the squashed Gaussian by quadrature over the
  // pre-squash variable u, then backward soft policy evaluation.
  const Matrix<double> eye = Matrix<double>::Identity(S, S);
  const auto draw = policy.forward(policy.params(), eye, {Matrix<double>::Zero(1, S)});
  std::array<double, S> mean_a{}, mean_logp{}, v{};
  for (int s = 0; s < S; ++s) {
    const double mu = draw.mean[0](0, s), sigma = std::exp(draw.log_std[0](0, s));
    const int n = 400000;
    const double lo = mu - 12 * sigma, hi = mu + 12 * sigma, h = (hi - lo) / n;
    double ea = 0, elp = 0, mass = 0;
    for (int i = 0; i <= n; ++i) {
      const double u = lo + i * h, w = (i == 0 || i == n) ? 0.5 : 1.0;
      const double z = (u - mu) / sigma;
      const double log_n = -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2 * std::numbers::pi);
      const double log_cosh = std::abs(u) + std::log1p(std::exp(-2 * std::abs(u))) - std::log(2.0);
      const double pdf = std::exp(log_n);
      mass += w * pdf * h;
      ea += w * pdf * h * std::tanh(u);
      elp += w * pdf * h * (log_n + 2 * log_cosh);  // log pi(a) = log N(u) - log(1 - tanh^2 u)
    }
    mean_a[s] = ea / mass;
    mean_logp[s] = elp / mass;
  }
  for (int s = S - 1; s >= 0; --s) {
    const double next = s + 1 < S ? gamma * v[s + 1] : 0.0;
    v[s] = c[s] + b * mean_a[s] + next - alpha * mean_logp[s];
  }
  auto q_oracle = [&](int s, double a) { return c[s] + b * a + (s + 1 < S ? gamma * v[s + 1] : 0.0); };

  nets::Adam<double> opt0(critic.params(0), 1e-3), opt1(critic.params(1), 1e-3);
  nets::Adam<double> fine0(critic.params(0), 1e-4), fine1(critic.params(1), 1e-4);
  const int updates = 20000, batch_size = 256;
  for (int step = 0; step < updates; ++step) {
    TransitionBatch<double> tb;
    tb.states = Matrix<double>::Zero(S, batch_size);
    tb.next_states = Matrix<double>::Zero(S, batch_size);
    tb.actions = uniform<double>(1, batch_size, -1, 1, rng);
    tb.rewards = RowVector<double>::Zero(batch_size);
    tb.dones = RowVector<double>::Zero(batch_size);
    for (int i = 0; i < batch_size; ++i) {
      const int s = std::uniform_int_distribution<int>(0, S - 1)(rng);
      tb.states(s, i) = 1;
      tb.next_states(std::min(s + 1, S - 1), i) = 1;
      tb.rewards(i) = c[s] + b * tb.actions(0, i);
      tb.dones(i) = s == S - 1 ? 1.0 : 0.0;
    }
    const RowVector<double> target = critic::td_target(tb, policy, critic, alpha, gamma, rng);
    auto g0 = critic.params(0).zeros_like(), g1 = critic.params(1).zeros_like();
    critic::critic_loss(critic, tb, target, {&g0, &g1});
    // Last quarter at a lower learning rate to settle the sampling noise.
    if (step < 3 * updates / 4) {
      opt0.step(critic.params(0), g0);
      opt1.step(critic.params(1), g1);
    } else {
      fine0.step(critic.params(0), g0);
      fine1.step(critic.params(1), g1);
    }
    nets::ema_update(critic.target(0), critic.params(0), 0.01);
    nets::ema_update(critic.target(1), critic.params(1), 0.01);
  }
  double worst = 0;
  for (int s = 0; s < S; ++s) {
    for (double a : {-0.95, -0.5, 0.0, 0.5, 0.95}) {
      const Vector<double> act = Vector<double>::Constant(1, a);
      for (int k = 0; k < 2; ++k) {
        worst = std::max(worst, std::abs(critic.q_value(k, eye.col(s), act) - q_oracle(s, a)));
      }
    }
  }
  return {worst <= 0.05, fmt("max |Q - Q_dp| = %.4f over 5 states x 5 actions x 2 critics after %d updates (V_dp(0) = %.3f)",
                             worst, updates, v[0])};
}

// ---------------------------------------------------------------- 3

Outcome model_linear() {
  envs::LinearSystem env;
  const auto& A = env.params().A;
  Rng rng(303);
  auto collect = [&](int n, std::uint64_t base) {
    TransitionBatch<double> d;
    d.states.resize(3, n);
    d.actions.resize(2, n);
    d.next_states.resize(3, n);
    d.rewards.resize(n);
    d.dones = RowVector<double>::Zero(n);
    Vector<double> s = env.reset(base);
    std::uint64_t episode = 0;
    for (int i = 0; i < n; ++i) {
      const Vector<double> a = uniform<double>(2, 1, -1, 1, rng);
      const auto r = env.step(a);
      d.states.col(i) = s;
      d.actions.col(i) = a;
      d.next_states.col(i) = r.state;
      d.rewards(i) = r.reward;
      s = r.finished() ? env.reset(base + ++episode) : r.state;
    }
    return d;
  };
  const auto train = collect(5000, 1);
  const auto held = collect(1000, 100000);

  model::DynamicsModel<double> model({3, 2, 128, 2, false}, rng);
  for (int i = 0; i < train.size(); ++i) model.normalizer().observe(train.states.col(i));
  model.normalizer().freeze();
  nets::Adam<double> opt(model.params(), 1e-3);
  for (int step = 0; step < 6000; ++step) {
    std::vector<int> idx(256);
    for (int& i : idx) i = std::uniform_int_distribution<int>(0, static_cast<int>(train.size()) - 1)(rng);
    TransitionBatch<double> mb{train.states(Eigen::all, idx), train.actions(Eigen::all, idx),
                               train.rewards(Eigen::all, idx), train.next_states(Eigen::all, idx),
                               train.dones(Eigen::all, idx)};
    auto g = model.params().zeros_like();
    model.loss(mb, &g);
    opt.step(model.params(), g);
  }
  const Matrix<double> pred = model.forward(model.params(), held.states, held.actions);
  const double mse = (pred - held.next_states).colwise().squaredNorm().mean();
  const Matrix<double> delta = held.next_states - held.states;
  const double delta_var = (delta.colwise() - delta.rowwise().mean()).colwise().squaredNorm().mean();
  const double ratio = mse / delta_var;

  // Open-loop J = 4 rollouts from held-out states under random actions.
  // Errors compound at most like e_j <= e_1 (1 + L + ... + L^{j-1}), L = ||A||_2.
  const double L = Eigen::JacobiSVD<Matrix<double>>(A).singularValues()(0);
  const int J = 4, n = 500;
  std::vector<double> err(J, 0.0);
  for (int i = 0; i < n; ++i) {
    Vector<double> real = held.states.col(i), imagined = real;
    for (int j = 0; j < J; ++j) {
      const Vector<double> a = uniform<double>(2, 1, -1, 1, rng);
      real = A * real + env.params().B * a;
      imagined = model.predict(imagined, a);
      err[j] += (real - imagined).squaredNorm() / n;
    }
  }
  bool bounded = true;
  std::string curve;
  const double e1 = std::sqrt(err[0]);
  double geometric = 0;
  for (int j = 0; j < J; ++j) {
    geometric += std::pow(L, j);
    const double ej = std::sqrt(err[j]);
    bounded = bounded && ej <= e1 * geometric;
    curve += fmt(" %.4f<=%.4f", ej, e1 * geometric);
  }
  return {ratio < 0.1 && bounded,
          fmt("one-step MSE / delta variance = %.4f (< 0.1); rollout RMS vs bound:", ratio) + curve};
}

// ---------------------------------------------------------------- 4

double trapezoid_oracle(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  long double area = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const long double y0 = std::clamp((y[i - 1] - lo) / (hi - lo), 0.0, 1.0);
    const long double y1 = std::clamp((y[i] - lo) / (hi - lo), 0.0, 1.0);
    area += (x[i] - x[i - 1]) * (y0 + y1) / 2;
  }
  return static_cast<double>(area / (x.back() - x.front()));
}

Outcome fas_oracle() {
  Rng rng(404);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::set<int> points;
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    while (static_cast<int>(points.size()) < n) points.insert(std::uniform_int_distribution<int>(1, 40)(rng));
    eval::ScoreCurve curve;
    curve.asl_grid.assign(points.begin(), points.end());
    std::vector<double> x;
    for (int k : curve.asl_grid) {
      x.push_back(k);
      curve.mean_returns.push_back(std::uniform_real_distribution<double>(-1500, 100)(rng));
      curve.std_errors.push_back(1.0);
    }
    curve.episodes_per_point = 10;
    const double lo = std::uniform_real_distribution<double>(-1600, -800)(rng);
    const double hi = lo + std::uniform_real_distribution<double>(100, 1500)(rng);
    worst = std::max(worst, std::abs(eval::fas(curve, lo, hi).fas - trapezoid_oracle(x, curve.mean_returns, lo, hi)));
  }
  eval::ScoreCurve flat;
  flat.asl_grid = eval::default_asl_grid();
  flat.episodes_per_point = 1;
  flat.std_errors.assign(flat.asl_grid.size(), 0.0);
  flat.mean_returns.assign(flat.asl_grid.size(), 10.0);
  const double at_max = eval::fas(flat, 0.0, 10.0).fas;
  flat.mean_returns.assign(flat.asl_grid.size(), 0.0);
  const double at_min = eval::fas(flat, 0.0, 10.0).fas;
  eval::ScoreCurve line;
  for (int k = 1; k <= 30; ++k) {
    line.asl_grid.push_back(k);
    line.mean_returns.push_back(10.0 * (30 - k) / 29.0);
    line.std_errors.push_back(0.0);
  }
  line.episodes_per_point = 1;
  const double linear = eval::fas(line, 0.0, 10.0).fas;
  const bool ok = worst <= 1e-9 && at_max == 1.0 && at_min == 0.0 && std::abs(linear - 0.5) <= 1e-9;
  return {ok, fmt("100 random curves max |fas - oracle| = %.2e; const-max %.17g, const-min %.17g, linear %.17g", worst,
                  at_max, at_min, linear)};
}

// ---------------------------------------------------------------- 7

Outcome planning_parity() {
  const std::vector<int> grid = eval::default_asl_grid();
  const int episodes = 5;
  bool ok = true;
  std::string detail;
  for (const std::string name : {"pendulum", "linear", "reacher-point"}) {
    auto env = envs::make_environment(name);
    TrainConfig cfg;
    cfg.env = name;
    cfg.J = 4;
    cfg.hidden_size = 64;
    cfg.batch_size = 64;
    cfg.start_steps = 500;
    cfg.max_steps = 3000;
    cfg.seed = 7;
    trainer::TrainOptions opts;
    opts.evaluate = false;
    const auto t = trainer::srl_train(cfg, *env, opts);
    const auto& agent = t.agent();

    const std::uint64_t seed = 99;
    const auto closed = trainer::run_episodes(*env, trainer::sequence_controller(agent), trainer::fixed_schedule(1),
                                              episodes, seed);
    eval::GroundTruthStepModel truth(*env);
    const auto plan = eval::online_planning_eval(agent, truth, *env, grid, episodes, seed);
    double worst = 0;
    bool calls = plan.aborted.empty();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      worst = std::max(worst, std::abs(plan.curve.mean_returns[i] - closed.mean()));
      calls = calls && plan.model_calls[i] == static_cast<std::uint64_t>(grid[i] - 1) * plan.decisions[i];
    }
    ok = ok && worst <= 1e-9 * std::max(1.0, std::abs(closed.mean())) && calls;
    detail += fmt(" %s: max |plan - closed| = %.1e, calls=(k-1)*decisions %s;", name.c_str(), worst,
                  calls ? "exact" : "WRONG");
  }
  return {ok, "grid 1..30" + detail};
}

// ---------------------------------------------------------------- 8

Outcome bookkeeping() {
  envs::Pendulum env;
  TrainConfig cfg;
  cfg.J = 4;
  cfg.hidden_size = 64;
  cfg.batch_size = 64;
  cfg.start_steps = 1000;
  cfg.max_steps = 10000;
  cfg.seed = 8;
  trainer::TrainOptions opts;
  opts.evaluate = false;
  const auto t = trainer::srl_train(cfg, env, opts);
  const auto& c = t.counters();
  const std::int64_t expected_gs = cfg.max_steps - cfg.start_steps;
  bool ok = c.primitive_steps == cfg.max_steps && c.gradient_steps == expected_gs &&
            c.critic_updates == expected_gs && c.model_updates == expected_gs && c.ema_updates == expected_gs &&
            c.actor_updates == expected_gs / 4 && c.temperature_updates == expected_gs / 4;

  // Every stored transition must be reproducible by the real dynamics.
  const auto& buf = t.buffer();
  std::size_t imagined = 0;
  envs::Pendulum probe;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const Transition tr = buf.at(i);
    probe.reset(0);
    probe.set_state(std::atan2(tr.state(1), tr.state(0)), tr.state(2));
    const auto r = probe.step(tr.action.cast<double>());
    if ((r.state - tr.next_state.cast<double>()).cwiseAbs().maxCoeff() > 1e-4 || std::abs(r.reward - tr.reward) > 1e-3) {
      ++imagined;
    }
  }
  ok = ok && imagined == 0 && buf.size() == static_cast<std::size_t>(cfg.max_steps);
  return {ok, fmt("gradient steps %lld (expected %lld), critic %lld, model %lld, EMA %lld, actor %lld (floor/4 = %lld), "
                  "buffer %zu, non-environment transitions %zu",
                  static_cast<long long>(c.gradient_steps), static_cast<long long>(expected_gs),
                  static_cast<long long>(c.critic_updates), static_cast<long long>(c.model_updates),
                  static_cast<long long>(c.ema_updates), static_cast<long long>(c.actor_updates),
                  static_cast<long long>(expected_gs / 4), buf.size(), imagined)};
}

// ---------------------------------------------------------------- 5, 6, 9

struct Trained {
  std::string label;
  std::uint64_t seed;
  std::unique_ptr<trainer::Trainer> trainer;
  eval::SweepMode mode;
};

class Zoo {
 public:
  explicit Zoo(std::int64_t steps) : steps_(steps) {}

  const Trained& get(Algorithm algo, int J, std::uint64_t seed, std::int64_t steps = 0) {
    const std::string label = algo == Algorithm::sac ? "SAC" : "SRL-" + std::to_string(J);
    const std::string key = label + "/" + std::to_string(seed);
    if (auto it = runs_.find(key); it != runs_.end()) return it->second;
    TrainConfig cfg;
    cfg.algo = algo;
    cfg.J = J;
    cfg.seed = seed;
    cfg.max_steps = steps > 0 ? steps : steps_;
    cfg.start_steps = std::min<std::int64_t>(cfg.start_steps, cfg.max_steps / 5);
    cfg.eval_frequency = 5000;
    auto env = std::make_unique<envs::Pendulum>();
    const auto t0 = std::chrono::steady_clock::now();
    trainer::TrainOptions opts;
    opts.evaluate = false;
    auto tr = std::make_unique<trainer::Trainer>(cfg, *env, opts);
    tr->run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "  trained " << key << " (" << cfg.max_steps << " steps, " << static_cast<int>(secs) << " s)\n"
              << std::flush;
    envs_.push_back(std::move(env));
    Trained t{label, seed, std::move(tr), algo == Algorithm::sac ? eval::SweepMode::repeat : eval::SweepMode::sequence};
    return runs_.emplace(key, std::move(t)).first->second;
  }

  /// Random-policy mean and standard error: the lower FAS anchor (1000 episodes).
  const trainer::EpisodeStats& random_stats() {
    if (!random_) {
      envs::Pendulum env;
      random_ = eval::random_policy_stats(env, 1000, 5150);
    }
    return *random_;
  }

 private:
  std::int64_t steps_;
  std::map<std::string, Trained> runs_;
  std::vector<std::unique_ptr<envs::Environment>> envs_;
  std::optional<trainer::EpisodeStats> random_;
};

const std::vector<int> kFasGrid{1, 2, 4, 8, 16};
constexpr std::uint64_t kEvalSeed = 777;

eval::ScoreCurve curve_of(const Trained& t) {
  envs::Pendulum env;
  return eval::asl_sweep(t.trainer->agent(), env, kFasGrid, 10, t.mode, kEvalSeed);
}

double best_of(const std::vector<eval::ScoreCurve>& curves) {
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& c : curves) hi = std::max(hi, c.best());
  return hi;
}

Outcome frequency_robustness(Zoo& zoo) {
  std::vector<const Trained*> sac, srl;
  for (std::uint64_t s = 1; s <= 3; ++s) sac.push_back(&zoo.get(Algorithm::sac, 1, s));
  for (std::uint64_t s = 1; s <= 3; ++s) srl.push_back(&zoo.get(Algorithm::srl, 4, s));
  std::vector<eval::ScoreCurve> sac_curves, srl_curves, all;
  for (const auto* t : sac) sac_curves.push_back(curve_of(*t));
  for (const auto* t : srl) srl_curves.push_back(curve_of(*t));
  all = sac_curves;
  all.insert(all.end(), srl_curves.begin(), srl_curves.end());
  const auto& rnd = zoo.random_stats();
  const double lo = rnd.mean(), hi = best_of(all);

  std::vector<eval::FasEntry> entries;
  auto mean_fas = [&](const std::vector<eval::ScoreCurve>& curves, const std::string& label) {
    double m = 0;
    for (const auto& c : curves) {
      const double f = eval::fas(c, lo, hi).fas;
      entries.push_back({"pendulum", label, f});
      m += f / static_cast<double>(curves.size());
    }
    return m;
  };
  const double sac_fas = mean_fas(sac_curves, "SAC"), srl_fas = mean_fas(srl_curves, "SRL-4");

  // Baseline sanity: SAC at ASL 1 (all seeds pooled) against the random policy.
  std::vector<double> pooled;
  for (const auto* t : sac) {
    envs::Pendulum env;
    const auto st = trainer::run_episodes(env, trainer::repeat_controller(t->trainer->agent()),
                                          trainer::fixed_schedule(1), 10, kEvalSeed);
    pooled.insert(pooled.end(), st.returns.begin(), st.returns.end());
  }
  trainer::EpisodeStats sac1;
  sac1.returns = pooled;
  const double z = (sac1.mean() - rnd.mean()) /
                   std::sqrt(sac1.standard_error() * sac1.standard_error() + rnd.standard_error() * rnd.standard_error());

  std::cout << eval::fas_table_markdown(entries);
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::cout << "  " << (i < 3 ? "SAC  " : "SRL-4") << " curve:";
    for (double m : all[i].mean_returns) std::cout << ' ' << static_cast<int>(m);
    std::cout << "\n";
  }
  const bool ok = srl_fas - sac_fas >= 0.10 && z >= 5.0;
  return {ok, fmt("mean FAS SRL-4 %.3f vs SAC %.3f (diff %.3f, need >= 0.10); anchors [%.1f, %.1f]; "
                  "SAC ASL-1 %.1f vs random %.1f: %.1f sigma (need >= 5)",
                  srl_fas, sac_fas, srl_fas - sac_fas, lo, hi, sac1.mean(), rnd.mean(), z)};
}

Outcome stochastic_correlation(Zoo& zoo) {
  std::vector<const Trained*> policies;
  for (std::uint64_t s = 1; s <= 2; ++s) {
    policies.push_back(&zoo.get(Algorithm::sac, 1, s));
    policies.push_back(&zoo.get(Algorithm::srl, 2, s));
    policies.push_back(&zoo.get(Algorithm::srl, 4, s));
  }
  auto measure = [&]() {
    std::vector<eval::ScoreCurve> curves;
    for (const auto* t : policies) curves.push_back(curve_of(*t));
    const double lo = zoo.random_stats().mean(), hi = best_of(curves);
    std::vector<eval::PolicySummary> rows;
    for (std::size_t i = 0; i < policies.size(); ++i) {
      envs::Pendulum env;
      const auto st = eval::stochastic_timestep_eval(policies[i]->trainer->agent(), env, 10, kEvalSeed,
                                                     policies[i]->mode, 16);
      rows.push_back({policies[i]->label + " s" + std::to_string(policies[i]->seed), "pendulum",
                      eval::fas(curves[i], lo, hi).fas, st.mean()});
    }
    return eval::compare(rows);
  };
  const auto first = measure();
  const auto second = measure();
  bool reproducible = first.pearson_r && second.pearson_r && *first.pearson_r == *second.pearson_r;
  for (std::size_t i = 0; reproducible && i < first.rows.size(); ++i) {
    reproducible = first.rows[i].fas == second.rows[i].fas &&
                   first.rows[i].stochastic_return == second.rows[i].stochastic_return;
  }
  std::cout << eval::comparison_markdown(first);
  const double r = first.pearson_r.value_or(std::nan(""));
  // Reproducibility is the gate; r below 0.6 is flagged for inspection.
  return {reproducible, fmt("%zu policies, Pearson r(FAS, U{1..16} return) = %.3f (%s 0.6), reproducible: %s",
                            first.rows.size(), r, r >= 0.6 ? ">=" : "BELOW", reproducible ? "yes" : "no")};
}

Outcome long_sequences(Zoo& zoo, std::int64_t steps) {
  const auto& t = zoo.get(Algorithm::srl, 8, 1, steps);
  const auto& agent = t.trainer->agent();
  envs::Pendulum env;
  Rng rng(909);
  bool valid = true;
  double max_abs = 0;
  for (int e = 0; e < 100; ++e) {
    const Vector<double> obs = env.reset(derive_seed(909, e));
    const Matrix<Real> state = obs.cast<Real>();
    const auto noise = agent.policy().draw_noise(30, 1, rng);
    const auto d = agent.policy().forward(agent.policy().params(), agent.features(state), noise);
    if (d.length() != 30) valid = false;
    for (int k = 0; k < d.length(); ++k) {
      max_abs = std::max(max_abs, static_cast<double>(d.actions[k].cwiseAbs().maxCoeff()));
      valid = valid && d.actions[k].allFinite() && d.actions[k].cwiseAbs().maxCoeff() <= 1 &&
              std::isfinite(d.log_probs[k](0));
    }
  }
  const auto curve = eval::asl_sweep(agent, env, eval::default_asl_grid(), 10, eval::SweepMode::sequence, kEvalSeed);
  bool finite = curve.asl_grid == eval::default_asl_grid();
  for (double m : curve.mean_returns) finite = finite && std::isfinite(m);
  std::string pts;
  for (std::size_t i = 0; i < curve.asl_grid.size(); ++i) {
    pts += fmt(" %d:%.0f", curve.asl_grid[i], curve.mean_returns[i]);
  }
  return {valid && finite, fmt("100 sampled ASL-30 sequences bounded (max |a| = %.4f) with finite log-probs: %s; "
                               "full-grid sweep:",
                               max_abs, valid ? "yes" : "no") +
                               pts};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::int64_t steps = 50000, long_steps = 20000;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_option("--steps", steps, "Primitive steps per pendulum agent in criteria 5 and 6");
  app.add_option("--long-steps", long_steps, "Primitive steps for the SRL-8 agent of criterion 9");
  CLI11_PARSE(app, argc, argv);
  auto selected = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
  if (steps != 50000) std::cout << "note: non-default training length " << steps << " steps\n";

  Zoo zoo(steps);
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, gradient_suite},
      {2, critic_chain},
      {3, model_linear},
      {4, fas_oracle},
      {7, planning_parity},
      {8, bookkeeping},
      {5, [&] { return frequency_robustness(zoo); }},
      {6, [&] { return stochastic_correlation(zoo); }},
      {9, [&] { return long_sequences(zoo, long_steps); }},
  };
  std::map<int, Outcome> results;
  for (const auto& [id, run] : criteria) {
    if (!selected(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << fmt("%.1f", secs) << " s) "
              << o.detail << "\n"
              << std::flush;
    results[id] = o;
  }
  int failed = 0;
  std::cout << "\nsummary\n";
  for (const auto& [id, o] : results) {
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "\n";
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
