#pragma once

#include "srl/actor/actor_loss.hpp"
#include "srl/core/replay_buffer.hpp"
#include "srl/critic/td_target.hpp"
#include "srl/latent/temporal_consistency.hpp"
#include "srl/trainer/periodic_eval.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <cstdio>
#include <ostream>

namespace srl::trainer {

inline constexpr const char* kVersion = "srl 0.1.0";

/// ISO-8601 UTC, second resolution.
inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct TrainCounters {
  std::int64_t primitive_steps = 0;
  std::int64_t decisions = 0;  // sequences started
  std::int64_t gradient_steps = 0;
  std::int64_t actor_updates = 0;
  std::int64_t critic_updates = 0;
  std::int64_t model_updates = 0;
  std::int64_t temperature_updates = 0;
  std::int64_t ema_updates = 0;
  std::int64_t episodes = 0;  // completed training episodes
};

inline void to_json(nlohmann::json& j, const TrainCounters& c) {
  j = {{"primitive_steps", c.primitive_steps}, {"decisions", c.decisions},
       {"gradient_steps", c.gradient_steps},   {"actor_updates", c.actor_updates},
       {"critic_updates", c.critic_updates},   {"model_updates", c.model_updates},
       {"temperature_updates", c.temperature_updates}, {"ema_updates", c.ema_updates},
       {"episodes", c.episodes}};
}

/// One metrics log line, written at every evaluation cycle. Losses are means
/// over the gradient steps since the previous line.
struct MetricsRow {
  std::int64_t step = 0;
  std::int64_t iteration = 0;
  std::int64_t gradient_steps = 0;
  double model_loss = std::nan("");
  double critic_loss = std::nan("");
  double actor_loss = std::nan("");
  double alpha = std::nan("");
  double q_mean = std::nan("");
  std::vector<double> entropy;  // per sequence position, -mean log pi
  double train_return = std::nan("");
  double eval_return = std::nan("");
  double wall_seconds = 0;  // kept out of the CSV so it stays reproducible
};

/// Raised when a loss or parameter turns non-finite; carries a state dump.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, nlohmann::json diagnostic)
      : NumericError(what), diagnostic_(std::move(diagnostic)) {}
  const nlohmann::json& diagnostic() const { return diagnostic_; }

 private:
  nlohmann::json diagnostic_;
};

struct TrainOptions {
  std::optional<std::filesystem::path> run_dir;  // metrics, manifest and checkpoints go here
  std::ostream* log = nullptr;                   // progress lines
  bool evaluate = true;
};

/// Sequence RL training loop; SAC is the special case J = 1 with actor
/// updates every gradient step.
///
/// Each iteration draws a sequence at the current observation (uniform random
/// during warm-up) and executes it action by action. Every primitive step is
/// stored, and once warm-up is over each one triggers `updates_per_step`
/// gradient steps: model, critics, then (on schedule) actor and temperature,
/// then the EMA of every target. A finished episode discards the rest of the
/// sequence.
class Trainer {
 public:
  Trainer(TrainConfig config, envs::Environment& env, TrainOptions options = {})
      : config_((config.validate(), std::move(config))),
        env_(env),
        eval_env_(env.clone()),
        options_(std::move(options)),
        agent_(config_, env.spec(), derive_seed(config_.seed, 1)),
        buffer_(static_cast<std::size_t>(config_.buffer_capacity), env.spec().state_dim, env.spec().action_dim),
        env_rng_(derive_seed(config_.seed, 2)),
        policy_rng_(derive_seed(config_.seed, 3)),
        sampler_rng_(derive_seed(config_.seed, 4)),
        policy_opt_(agent_.policy().params(), config_.lr_actor),
        critic_opt_{nets::Adam<Real>(agent_.critic().params(0), config_.lr_critic),
                    nets::Adam<Real>(agent_.critic().params(1), config_.lr_critic)},
        alpha_opt_(agent_.temperature().params(), config_.lr_alpha) {
    if (agent_.has_model()) model_opt_.emplace(agent_.model().params(), config_.lr_model);
    if (agent_.latent()) encoder_opt_.emplace(agent_.encoder().params(), config_.lr_model);
    if (config_.latent && config_.latent_horizon < 1) throw ConfigError("latent.horizon", "must be >= 1");
    start_ = std::chrono::steady_clock::now();
    started_at_ = std::chrono::system_clock::now();
    if (options_.run_dir) std::filesystem::create_directories(*options_.run_dir);
  }

  const TrainConfig& config() const { return config_; }
  const Agent& agent() const { return agent_; }
  Agent& agent() { return agent_; }
  const TrainCounters& counters() const { return counters_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const std::vector<MetricsRow>& metrics() const { return metrics_; }

  /// Trains until max_steps primitive steps have been executed.
  void run() {
    while (counters_.primitive_steps < config_.max_steps) iterate();
    if (options_.evaluate && (metrics_.empty() || metrics_.back().step != counters_.primitive_steps)) {
      record_metrics_();
    }
    if (options_.run_dir) write_manifest_();
  }

  /// One decision: sample (or draw at random) a sequence and execute it.
  void iterate() {
    if (!obs_) begin_episode_();
    const int J = config_.sequence_length();
    std::vector<Vector<double>> actions;
    if (counters_.primitive_steps < config_.start_steps) {
      for (int k = 0; k < J; ++k) actions.push_back(uniform<double>(env_.spec().action_dim, 1, -1.0, 1.0, env_rng_));
    } else {
      actions = agent_.act(*obs_, J, false, policy_rng_, &previous_action_);
    }
    ++counters_.decisions;
    for (const auto& a : actions) {
      if (counters_.primitive_steps >= config_.max_steps) break;
      const auto r = env_.step(a);
      Transition t{obs_->cast<Real>(), a.cast<Real>(), static_cast<Real>(r.reward), r.state.cast<Real>(), r.done,
                   r.truncated};
      buffer_.push(t);
      if (agent_.has_model() && !agent_.latent() && config_.model_normalize &&
          !agent_.model().normalizer().frozen()) {
        agent_.model().normalizer().observe(t.state);
      }
      ++counters_.primitive_steps;
      episode_return_ += r.reward;
      previous_action_ = a;
      obs_ = r.state;

      if (counters_.primitive_steps > config_.start_steps) {
        for (int u = 0; u < config_.updates_per_step; ++u) gradient_step_();
      }
      if (options_.evaluate && counters_.primitive_steps % config_.eval_frequency == 0) record_metrics_();
      if (r.finished()) {
        recent_returns_.push_back(episode_return_);
        ++counters_.episodes;
        obs_.reset();
        break;  // the rest of the sequence is discarded
      }
    }
  }

  /// Writes the current agent to `dir`.
  void save_checkpoint(const std::filesystem::path& dir) const {
    agent_.save(dir);
    nlohmann::json m = {{"config", config_},
                        {"counters", counters_},
                        {"normalizer_frozen", agent_.has_model() && agent_.model().normalizer().frozen()},
                        {"rng", {{"env", save_rng_state(env_rng_)},
                                 {"policy", save_rng_state(policy_rng_)},
                                 {"sampler", save_rng_state(sampler_rng_)}}}};
    std::ofstream(dir / "manifest.json") << m.dump(2) << "\n";
  }

 private:
  void begin_episode_() {
    obs_ = env_.reset(derive_seed(config_.seed, 0x10000ULL + static_cast<std::uint64_t>(episode_index_++)));
    buffer_.end_episode();
    previous_action_ = Vector<double>::Zero(env_.spec().action_dim);
    episode_return_ = 0;
  }

  bool actor_due_() const {
    const std::int64_t freq = config_.effective_actor_update_frequency();
    if (config_.actor_schedule == ActorSchedule::gradient_step) return counters_.gradient_steps % freq == 0;
    return counters_.decisions % freq == 0 && counters_.decisions != last_actor_decision_;
  }

  [[noreturn]] void diverged_(const std::string& what) const {
    nlohmann::json d = {{"error", what},
                        {"counters", counters_},
                        {"alpha", static_cast<double>(agent_.temperature().alpha())},
                        {"last_losses", {{"model", last_.model}, {"critic", last_.critic}, {"actor", last_.actor}}},
                        {"config", config_}};
    if (options_.run_dir) std::ofstream(*options_.run_dir / "diagnostic.json") << d.dump(2) << "\n";
    throw TrainingDiverged("training diverged at step " + std::to_string(counters_.primitive_steps) + ": " + what, d);
  }

  void check_(double value, const char* what) const {
    if (!std::isfinite(value)) diverged_(std::string("non-finite ") + what);
  }

  void gradient_step_() {
    if (counters_.gradient_steps == 0 && agent_.has_model() && !agent_.latent() && config_.model_normalize) {
      agent_.model().normalizer().freeze();
    }
    ++counters_.gradient_steps;
    const auto n = static_cast<std::size_t>(config_.batch_size);
    const auto idx = buffer_.sample_indices(std::min(n, buffer_.size()), sampler_rng_);
    TransitionBatch<Real> batch = buffer_.gather<Real>(idx);
    std::optional<Matrix<Real>> prev;
    if (config_.initial_action_input == InitialActionInput::previous) prev = buffer_.previous_actions<Real>(idx);

    const Real alpha = agent_.temperature().alpha();
    const Real gamma = static_cast<Real>(config_.gamma);
    auto& critic = agent_.critic();

    if (agent_.latent()) {
      latent_update_(batch, alpha, gamma, prev ? &batch.actions : nullptr);
    } else {
      if (agent_.has_model() && config_.train_model) {
        auto g = agent_.model().params().zeros_like();
        last_.model = agent_.model().loss(batch, &g);
        check_(last_.model, "model loss");
        model_opt_->step(agent_.model().params(), g, config_.grad_clip);
        ++counters_.model_updates;
        sums_.model += last_.model;
        ++sums_.model_n;
      }
      const RowVector<Real> target = critic::td_target(batch, agent_.policy(), critic, alpha, gamma, policy_rng_,
                                                       prev ? &batch.actions : nullptr);
      auto g0 = critic.params(0).zeros_like(), g1 = critic.params(1).zeros_like();
      last_.critic = critic::critic_loss(critic, batch, target, {&g0, &g1});
      check_(last_.critic, "critic loss");
      critic_opt_[0].step(critic.params(0), g0, config_.grad_clip);
      critic_opt_[1].step(critic.params(1), g1, config_.grad_clip);
    }
    ++counters_.critic_updates;
    sums_.critic += last_.critic;
    ++sums_.critic_n;

    if (actor_due_()) {
      last_actor_decision_ = counters_.decisions;
      const Matrix<Real> states = agent_.features(batch.states);
      actor_update_(states, alpha, prev ? &*prev : nullptr);
    }

    for (int k = 0; k < 2; ++k) nets::ema_update(critic.target(k), critic.params(k), static_cast<Real>(config_.tau));
    if (agent_.has_model()) {
      nets::ema_update(agent_.model().target_params(), agent_.model().params(), static_cast<Real>(config_.tau));
    }
    if (agent_.latent()) {
      nets::ema_update(agent_.encoder().target_params(), agent_.encoder().params(), static_cast<Real>(config_.tau));
    }
    ++counters_.ema_updates;
  }

  void actor_update_(const Matrix<Real>& states, Real alpha, const Matrix<Real>* prev) {
    auto& policy = agent_.policy();
    const int J = config_.sequence_length();
    auto g = policy.params().zeros_like();
    const auto noise = policy.draw_noise(J, states.cols(), policy_rng_);
    const auto res = actor::actor_loss<Real>(policy, policy.params(), agent_.critic(),
                                             agent_.has_model() ? &agent_.model() : nullptr, states, alpha, noise,
                                             config_.actor_critic_reduction, &g, prev);
    last_.actor = res.loss;
    check_(last_.actor, "actor loss");
    policy_opt_.step(policy.params(), g, config_.grad_clip);
    ++counters_.actor_updates;
    sums_.actor += res.loss;
    sums_.q += res.mean_q;
    ++sums_.actor_n;
    if (sums_.entropy.size() != res.mean_log_prob.size()) sums_.entropy.assign(res.mean_log_prob.size(), 0.0);
    for (std::size_t j = 0; j < res.mean_log_prob.size(); ++j) sums_.entropy[j] -= res.mean_log_prob[j];

    // Temperature: gradient on log alpha equals the loss value.
    auto& temp = agent_.temperature();
    const std::size_t used = config_.temperature_positions == TemperaturePositions::all
                                 ? res.log_probs.size()
                                 : static_cast<std::size_t>(states.cols());
    const Real grad = actor::temperature_gradient<Real>(alpha, std::span<const Real>(res.log_probs.data(), used),
                                                        temp.target_entropy());
    check_(grad, "temperature loss");
    auto ga = temp.params().zeros_like();
    ga[0](0, 0) = grad;
    alpha_opt_.step(temp.params(), ga);
    ++counters_.temperature_updates;
  }

  // Latent mode: temporal consistency trains the encoder and latent model;
  // the critic loss also reaches the online encoder.
  void latent_update_(const TransitionBatch<Real>& batch, Real alpha, Real gamma, const Matrix<Real>* executed) {
    auto& enc = agent_.encoder();
    auto& lm = agent_.model();
    auto& critic = agent_.critic();
    auto enc_g = enc.params().zeros_like();
    if (config_.train_model) {
      const auto windows = latent::sample_windows<Real>(buffer_, static_cast<std::size_t>(batch.size()),
                                                        config_.latent_horizon, sampler_rng_);
      auto lm_g = lm.params().zeros_like();
      const auto tc = latent::temporal_consistency_loss(enc, enc.params(), lm, lm.params(), windows, gamma, &enc_g, &lm_g);
      last_.model = tc.loss;
      check_(last_.model, "consistency loss");
      model_opt_->step(lm.params(), lm_g, config_.grad_clip);
      ++counters_.model_updates;
      sums_.model += last_.model;
      ++sums_.model_n;
    }
    nets::FeedForwardCache<Real> cache;
    TransitionBatch<Real> lb{enc.encode(enc.params(), batch.states, &cache), batch.actions, batch.rewards,
                             enc.encode(enc.target_params(), batch.next_states), batch.dones};
    const RowVector<Real> target = critic::td_target(lb, agent_.policy(), critic, alpha, gamma, policy_rng_, executed);
    const Real inv_b = Real(1) / static_cast<Real>(lb.size());
    Matrix<Real> d_latent = Matrix<Real>::Zero(lb.states.rows(), lb.size());
    last_.critic = 0;
    for (int k = 0; k < 2; ++k) {
      critic::CriticCache<Real> cc;
      const RowVector<Real> q = critic.forward(critic.params(k), lb.states, lb.actions, &cc);
      const RowVector<Real> diff = q - target;
      last_.critic += diff.squaredNorm() * inv_b;
      auto g = critic.params(k).zeros_like();
      Matrix<Real> ds;
      critic.backward(critic.params(k), cc, (Real(2) * inv_b) * diff, &g, &ds, nullptr);
      d_latent += ds;
      critic_opt_[static_cast<std::size_t>(k)].step(critic.params(k), g, config_.grad_clip);
    }
    check_(last_.critic, "critic loss");
    enc.backward(enc.params(), cache, d_latent, &enc_g);
    encoder_opt_->step(enc.params(), enc_g, config_.grad_clip);
  }

  void record_metrics_() {
    MetricsRow row;
    row.step = counters_.primitive_steps;
    row.iteration = counters_.decisions;
    row.gradient_steps = counters_.gradient_steps;
    if (sums_.model_n) row.model_loss = sums_.model / sums_.model_n;
    if (sums_.critic_n) row.critic_loss = sums_.critic / sums_.critic_n;
    if (sums_.actor_n) {
      row.actor_loss = sums_.actor / sums_.actor_n;
      row.q_mean = sums_.q / sums_.actor_n;
      for (double e : sums_.entropy) row.entropy.push_back(e / sums_.actor_n);
    }
    row.alpha = agent_.temperature().alpha();
    if (!recent_returns_.empty()) {
      row.train_return = std::accumulate(recent_returns_.begin(), recent_returns_.end(), 0.0) /
                         static_cast<double>(recent_returns_.size());
    }
    row.eval_return = periodic_eval(agent_, *eval_env_, config_.evaluation_length(), config_.eval_episodes,
                                    derive_seed(config_.seed, 5))
                          .mean();
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    sums_ = {};
    recent_returns_.clear();
    metrics_.push_back(row);
    if (options_.log) {
      char line[256];
      std::snprintf(line, sizeof line, "step %lld  eval %.2f  critic %.4g  alpha %.4g  %.0fs\n",
                    static_cast<long long>(row.step), row.eval_return, row.critic_loss, row.alpha, row.wall_seconds);
      *options_.log << line << std::flush;
    }
    if (options_.run_dir) {
      write_metrics_csv(*options_.run_dir / "metrics.csv", metrics_);
      write_timing_csv(*options_.run_dir / "timing.csv", metrics_);
      if (config_.checkpoints) save_checkpoint(*options_.run_dir / "checkpoint");
    }
  }

  void write_manifest_() const {
    const auto& dir = *options_.run_dir;
    write_metrics_csv(dir / "metrics.csv", metrics_);
    write_timing_csv(dir / "timing.csv", metrics_);
    nlohmann::json artifacts = nlohmann::json::array({"metrics.csv", "timing.csv"});
    if (config_.checkpoints) {
      save_checkpoint(dir / "checkpoint");
      artifacts.push_back("checkpoint");
    }
    nlohmann::json m = {{"version", kVersion},
                        {"config", config_},
                        {"seed", config_.seed},
                        {"env", config_.env},
                        {"started_at", utc_timestamp(started_at_)},
                        {"finished_at", utc_timestamp(std::chrono::system_clock::now())},
                        {"counters", counters_},
                        {"final_eval_return", metrics_.empty() ? nlohmann::json(nullptr)
                                                               : nlohmann::json(metrics_.back().eval_return)},
                        {"wall_seconds", metrics_.empty() ? 0.0 : metrics_.back().wall_seconds},
                        {"artifacts", artifacts}};
    std::ofstream(dir / "run.json") << m.dump(2) << "\n";
  }

 public:
  static std::string format_number(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
  }

  static void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
    std::size_t positions = 0;
    for (const auto& r : rows) positions = std::max(positions, r.entropy.size());
    std::ofstream os(path, std::ios::trunc);
    os << "step,iteration,gradient_steps,model_loss,critic_loss,actor_loss,alpha,q_mean,train_return,eval_return";
    for (std::size_t j = 0; j < positions; ++j) os << ",entropy_" << j;
    os << "\n";
    for (const auto& r : rows) {
      os << r.step << ',' << r.iteration << ',' << r.gradient_steps << ',' << format_number(r.model_loss) << ','
         << format_number(r.critic_loss) << ',' << format_number(r.actor_loss) << ',' << format_number(r.alpha)
         << ',' << format_number(r.q_mean) << ',' << format_number(r.train_return) << ','
         << format_number(r.eval_return);
      for (std::size_t j = 0; j < positions; ++j) {
        os << ',' << (j < r.entropy.size() ? format_number(r.entropy[j]) : "");
      }
      os << "\n";
    }
  }

  static void write_timing_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
    std::ofstream os(path, std::ios::trunc);
    os << "step,wall_seconds\n";
    for (const auto& r : rows) os << r.step << ',' << format_number(r.wall_seconds) << "\n";
  }

 private:
  struct Last {
    double model = std::nan(""), critic = std::nan(""), actor = std::nan("");
  };
  struct Sums {
    double model = 0, critic = 0, actor = 0, q = 0;
    std::int64_t model_n = 0, critic_n = 0, actor_n = 0;
    std::vector<double> entropy;
  };

  TrainConfig config_;
  envs::Environment& env_;
  std::unique_ptr<envs::Environment> eval_env_;
  TrainOptions options_;
  Agent agent_;
  ReplayBuffer buffer_;
  Rng env_rng_, policy_rng_, sampler_rng_;
  nets::Adam<Real> policy_opt_;
  std::array<nets::Adam<Real>, 2> critic_opt_;
  nets::Adam<Real> alpha_opt_;
  std::optional<nets::Adam<Real>> model_opt_;
  std::optional<nets::Adam<Real>> encoder_opt_;
  TrainCounters counters_;
  std::optional<Vector<double>> obs_;
  Vector<double> previous_action_;
  double episode_return_ = 0;
  std::uint64_t episode_index_ = 0;
  std::int64_t last_actor_decision_ = -1;
  std::vector<double> recent_returns_;
  std::vector<MetricsRow> metrics_;
  Last last_;
  Sums sums_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::system_clock::time_point started_at_;
};

/// Trains an SRL agent to config.max_steps.
inline Trainer srl_train(TrainConfig config, envs::Environment& env, TrainOptions options = {}) {
  config.algo = Algorithm::srl;
  Trainer t(std::move(config), env, std::move(options));
  t.run();
  return t;
}

/// SAC baseline: sequence length 1, actor updated every gradient step.
inline Trainer sac_train(TrainConfig config, envs::Environment& env, TrainOptions options = {}) {
  config.algo = Algorithm::sac;
  Trainer t(std::move(config), env, std::move(options));
  t.run();
  return t;
}

}  // namespace srl::trainer
