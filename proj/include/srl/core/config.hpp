#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace srl {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class Algorithm { srl, sac };

/// How the twin critics are reduced inside the actor objective.
enum class CriticReduction { min, first, mean };

/// Which sequence positions feed the temperature objective.
enum class TemperaturePositions { all, first };

/// Counter that gates actor updates: every gradient step, or every decision point.
enum class ActorSchedule { gradient_step, decision };

/// Recurrent input for the first action of a sequence.
enum class InitialActionInput { zero, previous };

NLOHMANN_JSON_SERIALIZE_ENUM(Algorithm, {{Algorithm::srl, "srl"}, {Algorithm::sac, "sac"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CriticReduction, {{CriticReduction::min, "min"},
                                               {CriticReduction::first, "first"},
                                               {CriticReduction::mean, "mean"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TemperaturePositions, {{TemperaturePositions::all, "all"},
                                                    {TemperaturePositions::first, "first"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ActorSchedule, {{ActorSchedule::gradient_step, "gradient_step"},
                                             {ActorSchedule::decision, "decision"}})
NLOHMANN_JSON_SERIALIZE_ENUM(InitialActionInput, {{InitialActionInput::zero, "zero"},
                                                  {InitialActionInput::previous, "previous"}})

/// Every knob of a training run. Defaults are the common hyperparameters
/// shared by SRL and SAC; bundled environments shorten max_steps.
struct TrainConfig {
  Algorithm algo = Algorithm::srl;
  std::string env = "pendulum";
  int J = 4;
  double gamma = 0.99;
  double tau = 0.005;
  double lr_model = 3e-4;
  double lr_critic = 3e-4;
  double lr_actor = 3e-4;
  double lr_alpha = 3e-4;
  std::int64_t buffer_capacity = 1'000'000;
  int batch_size = 256;
  std::int64_t start_steps = 10'000;
  std::int64_t max_steps = 50'000;
  std::int64_t eval_frequency = 2'500;
  int eval_episodes = 10;
  int actor_update_frequency = 4;
  int updates_per_step = 1;
  int hidden_size = 256;
  int num_hidden_layers = 2;
  std::optional<double> target_entropy;  // defaults to -d_a
  double init_temperature = 0.1;
  double log_std_min = -20.0;
  double log_std_max = 2.0;
  double grad_clip = 0.0;  // 0 disables clipping
  CriticReduction actor_critic_reduction = CriticReduction::min;
  TemperaturePositions temperature_positions = TemperaturePositions::all;
  ActorSchedule actor_schedule = ActorSchedule::gradient_step;
  InitialActionInput initial_action_input = InitialActionInput::zero;
  bool train_model = true;
  bool model_delta = false;
  bool model_normalize = true;
  bool latent = false;
  int latent_dim = 50;
  int latent_horizon = 5;
  int eval_J = 0;  // 0 means "use J"
  bool checkpoints = true;
  std::uint64_t seed = 1;

  /// Effective sequence length (SAC is always 1).
  int sequence_length() const { return algo == Algorithm::sac ? 1 : J; }
  int effective_actor_update_frequency() const {
    return algo == Algorithm::sac ? 1 : actor_update_frequency;
  }
  int evaluation_length() const { return eval_J > 0 ? eval_J : sequence_length(); }
  bool uses_model() const { return algo == Algorithm::srl && train_model; }

  void validate() const {
    auto positive = [](const char* key, double v) {
      if (!(v > 0)) throw ConfigError(key, "must be positive");
    };
    positive("J", J);
    if (!(gamma > 0 && gamma < 1)) throw ConfigError("gamma", "must lie in (0, 1)");
    if (!(tau > 0 && tau <= 1)) throw ConfigError("tau", "must lie in (0, 1]");
    positive("lr.model", lr_model);
    positive("lr.critic", lr_critic);
    positive("lr.actor", lr_actor);
    positive("lr.alpha", lr_alpha);
    positive("buffer_capacity", static_cast<double>(buffer_capacity));
    positive("batch_size", batch_size);
    if (start_steps < 0) throw ConfigError("start_steps", "must be non-negative");
    positive("max_steps", static_cast<double>(max_steps));
    positive("eval_frequency", static_cast<double>(eval_frequency));
    positive("eval_episodes", eval_episodes);
    positive("actor_update_frequency", actor_update_frequency);
    positive("updates_per_step", updates_per_step);
    positive("hidden_size", hidden_size);
    positive("num_hidden_layers", num_hidden_layers);
    positive("init_temperature", init_temperature);
    if (!(log_std_min < log_std_max)) throw ConfigError("log_std_min", "must be below log_std_max");
    if (grad_clip < 0) throw ConfigError("grad_clip", "must be non-negative");
    if (latent) {
      positive("latent.dim", latent_dim);
      positive("latent.horizon", latent_horizon);
      if (model_delta) throw ConfigError("latent", "latent mode cannot be combined with model_delta");
      if (algo != Algorithm::srl) throw ConfigError("latent", "latent mode requires algo=srl");
    }
    if (eval_J < 0) throw ConfigError("eval_J", "must be non-negative");
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"algo", c.algo},
                     {"env", c.env},
                     {"J", c.J},
                     {"gamma", c.gamma},
                     {"tau", c.tau},
                     {"lr.model", c.lr_model},
                     {"lr.critic", c.lr_critic},
                     {"lr.actor", c.lr_actor},
                     {"lr.alpha", c.lr_alpha},
                     {"buffer_capacity", c.buffer_capacity},
                     {"batch_size", c.batch_size},
                     {"start_steps", c.start_steps},
                     {"max_steps", c.max_steps},
                     {"eval_frequency", c.eval_frequency},
                     {"eval_episodes", c.eval_episodes},
                     {"actor_update_frequency", c.actor_update_frequency},
                     {"updates_per_step", c.updates_per_step},
                     {"hidden_size", c.hidden_size},
                     {"num_hidden_layers", c.num_hidden_layers},
                     {"target_entropy", c.target_entropy ? nlohmann::json(*c.target_entropy)
                                                         : nlohmann::json(nullptr)},
                     {"init_temperature", c.init_temperature},
                     {"log_std_min", c.log_std_min},
                     {"log_std_max", c.log_std_max},
                     {"grad_clip", c.grad_clip},
                     {"actor_critic_reduction", c.actor_critic_reduction},
                     {"temperature_positions", c.temperature_positions},
                     {"actor_schedule", c.actor_schedule},
                     {"initial_action_input", c.initial_action_input},
                     {"train_model", c.train_model},
                     {"model_delta", c.model_delta},
                     {"model_normalize", c.model_normalize},
                     {"latent", c.latent},
                     {"latent.dim", c.latent_dim},
                     {"latent.horizon", c.latent_horizon},
                     {"eval_J", c.eval_J},
                     {"checkpoints", c.checkpoints},
                     {"seed", c.seed}};
}

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const std::string& key, T& out) {
  try {
    out = j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(key, std::string("invalid value: ") + e.what());
  }
}

template <typename E>
void read_enum(const nlohmann::json& j, const std::string& key, E& out) {
  if (!j.is_string()) throw ConfigError(key, "expected a string");
  // Unknown strings silently map to the first enumerator; a round trip catches them.
  const E parsed = j.get<E>();
  if (nlohmann::json(parsed) != j) {
    throw ConfigError(key, "unknown value '" + j.get<std::string>() + "'");
  }
  out = parsed;
}

}  // namespace detail

/// Applies one flat key to the config. Unknown keys raise ConfigError naming the key.
inline void apply_config_key(TrainConfig& c, const std::string& key, const nlohmann::json& v) {
  using detail::read_enum;
  using detail::read_key;
  if (key == "algo") read_enum(v, key, c.algo);
  else if (key == "env") read_key(v, key, c.env);
  else if (key == "J") read_key(v, key, c.J);
  else if (key == "gamma") read_key(v, key, c.gamma);
  else if (key == "tau") read_key(v, key, c.tau);
  else if (key == "lr.model") read_key(v, key, c.lr_model);
  else if (key == "lr.critic") read_key(v, key, c.lr_critic);
  else if (key == "lr.actor") read_key(v, key, c.lr_actor);
  else if (key == "lr.alpha") read_key(v, key, c.lr_alpha);
  else if (key == "buffer_capacity") read_key(v, key, c.buffer_capacity);
  else if (key == "batch_size") read_key(v, key, c.batch_size);
  else if (key == "start_steps") read_key(v, key, c.start_steps);
  else if (key == "max_steps") read_key(v, key, c.max_steps);
  else if (key == "eval_frequency") read_key(v, key, c.eval_frequency);
  else if (key == "eval_episodes") read_key(v, key, c.eval_episodes);
  else if (key == "actor_update_frequency") read_key(v, key, c.actor_update_frequency);
  else if (key == "updates_per_step") read_key(v, key, c.updates_per_step);
  else if (key == "hidden_size") read_key(v, key, c.hidden_size);
  else if (key == "num_hidden_layers") read_key(v, key, c.num_hidden_layers);
  else if (key == "target_entropy") {
    if (v.is_null()) c.target_entropy.reset();
    else {
      double t = 0;
      read_key(v, key, t);
      c.target_entropy = t;
    }
  } else if (key == "init_temperature") read_key(v, key, c.init_temperature);
  else if (key == "log_std_min") read_key(v, key, c.log_std_min);
  else if (key == "log_std_max") read_key(v, key, c.log_std_max);
  else if (key == "grad_clip") read_key(v, key, c.grad_clip);
  else if (key == "actor_critic_reduction") read_enum(v, key, c.actor_critic_reduction);
  else if (key == "temperature_positions") read_enum(v, key, c.temperature_positions);
  else if (key == "actor_schedule") read_enum(v, key, c.actor_schedule);
  else if (key == "initial_action_input") read_enum(v, key, c.initial_action_input);
  else if (key == "train_model") read_key(v, key, c.train_model);
  else if (key == "model_delta") read_key(v, key, c.model_delta);
  else if (key == "model_normalize") read_key(v, key, c.model_normalize);
  else if (key == "latent") read_key(v, key, c.latent);
  else if (key == "latent.dim") read_key(v, key, c.latent_dim);
  else if (key == "latent.horizon") read_key(v, key, c.latent_horizon);
  else if (key == "eval_J") read_key(v, key, c.eval_J);
  else if (key == "checkpoints") read_key(v, key, c.checkpoints);
  else if (key == "seed") read_key(v, key, c.seed);
  else throw ConfigError(key, "unknown configuration key");
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) apply_config_key(c, it.key(), it.value());
}

/// Parses a command-line override "key=value". The value is read as JSON when
/// possible and as a bare string otherwise.
inline void apply_override(TrainConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must have the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  apply_config_key(c, key, value);
}

}  // namespace srl
