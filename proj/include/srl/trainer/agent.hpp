#pragma once

#include "srl/actor/sequence_policy.hpp"
#include "srl/actor/temperature.hpp"
#include "srl/core/config.hpp"
#include "srl/core/tensor_archive.hpp"
#include "srl/critic/twin_critic.hpp"
#include "srl/envs/environment.hpp"
#include "srl/latent/encoder.hpp"
#include "srl/model/dynamics_model.hpp"

#include <filesystem>
#include <fstream>
#include <optional>

namespace srl::trainer {

/// Every learned component of one agent: policy, twin critics, dynamics
/// model, temperature and, in latent mode, the encoder. The model then
/// operates on encodings rather than raw states.
class Agent {
 public:
  using Scalar = Real;

  Agent(const TrainConfig& config, const envs::EnvSpec& env, std::uint64_t init_seed)
      : config_(config), env_(env) {
    config_.validate();
    Rng rng(init_seed);
    const int feat = feature_dim();
    if (config_.latent) {
      encoder_.emplace(latent::EncoderSpec{env.state_dim, config_.latent_dim, config_.hidden_size, 2}, rng);
    }
    policy_ = actor::SequencePolicy<Scalar>({feat, env.action_dim, config_.hidden_size, config_.num_hidden_layers,
                                             config_.log_std_min, config_.log_std_max},
                                            rng);
    critic_ = critic::TwinCritic<Scalar>({feat, env.action_dim, config_.hidden_size, config_.num_hidden_layers}, rng);
    if (config_.sequence_length() > 1 || config_.latent) {
      model_.emplace(model::DynamicsModelSpec{feat, env.action_dim, config_.hidden_size, config_.num_hidden_layers,
                                              config_.model_delta},
                     rng);
    }
    const double target_entropy = config_.target_entropy.value_or(-static_cast<double>(env.action_dim));
    temperature_ = actor::Temperature<Scalar>(static_cast<Scalar>(config_.init_temperature),
                                              static_cast<Scalar>(target_entropy));
  }

  const TrainConfig& config() const { return config_; }
  const envs::EnvSpec& env_spec() const { return env_; }
  int feature_dim() const { return config_.latent ? config_.latent_dim : env_.state_dim; }

  actor::SequencePolicy<Scalar>& policy() { return policy_; }
  const actor::SequencePolicy<Scalar>& policy() const { return policy_; }
  critic::TwinCritic<Scalar>& critic() { return critic_; }
  const critic::TwinCritic<Scalar>& critic() const { return critic_; }
  bool has_model() const { return model_.has_value(); }
  model::DynamicsModel<Scalar>& model() { return model_.value(); }
  const model::DynamicsModel<Scalar>& model() const { return model_.value(); }
  actor::Temperature<Scalar>& temperature() { return temperature_; }
  const actor::Temperature<Scalar>& temperature() const { return temperature_; }
  bool latent() const { return encoder_.has_value(); }
  latent::Encoder<Scalar>& encoder() { return encoder_.value(); }
  const latent::Encoder<Scalar>& encoder() const { return encoder_.value(); }

  /// Policy input for raw observations (columns): identity or online encoding.
  Matrix<Scalar> features(const Matrix<Scalar>& states) const {
    return encoder_ ? encoder_->encode(states) : states;
  }

  /// `length` primitive actions from one observation. With `previous`, the
  /// recurrent input of the first step is that action instead of zero.
  std::vector<Vector<double>> act(const Vector<double>& observation, int length, bool deterministic, Rng& rng,
                                  const Vector<double>* previous = nullptr) const {
    require_dim(observation.size(), env_.state_dim, "Agent::act observation");
    const Vector<Real> feat = features(Matrix<Scalar>(observation.cast<Scalar>())).col(0);
    std::optional<Vector<Real>> prev;
    if (previous && config_.initial_action_input == InitialActionInput::previous) prev = previous->cast<Real>();
    const auto seq = policy_.sample_sequence(feat, length, rng, deterministic, prev ? &*prev : nullptr);
    std::vector<Vector<double>> out;
    out.reserve(seq.actions.size());
    for (const auto& a : seq.actions) out.push_back(a.cast<double>());
    return out;
  }

  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    save_tensors(dir / "policy.srlt", policy_.params());
    for (int k = 0; k < 2; ++k) {
      save_tensors(dir / ("critic" + std::to_string(k) + ".srlt"), critic_.params(k));
      save_tensors(dir / ("critic" + std::to_string(k) + "_target.srlt"), critic_.target(k));
    }
    save_tensors(dir / "temperature.srlt", temperature_.params());
    if (model_) {
      save_tensors(dir / "model.srlt", model_->params());
      save_tensors(dir / "model_target.srlt", model_->target_params());
      nets::ParameterSet<Scalar> norm;
      norm.add("mean", model_->normalizer().mean().size(), 1);
      norm.add("std", model_->normalizer().std().size(), 1);
      norm[0] = model_->normalizer().mean();
      norm[1] = model_->normalizer().std();
      save_tensors(dir / "normalizer.srlt", norm);
    }
    if (encoder_) {
      save_tensors(dir / "encoder.srlt", encoder_->params());
      save_tensors(dir / "encoder_target.srlt", encoder_->target_params());
    }
  }

  void load(const std::filesystem::path& dir) {
    auto read = [&](const char* file, nets::ParameterSet<Scalar>& dst) {
      const auto path = dir / file;
      if (!std::filesystem::exists(path)) throw std::runtime_error("checkpoint is missing " + path.string());
      assign_tensors(dst, load_tensors<Scalar>(path));
    };
    read("policy.srlt", policy_.params());
    read("critic0.srlt", critic_.params(0));
    read("critic1.srlt", critic_.params(1));
    read("critic0_target.srlt", critic_.target(0));
    read("critic1_target.srlt", critic_.target(1));
    read("temperature.srlt", temperature_.params());
    if (model_) {
      read("model.srlt", model_->params());
      read("model_target.srlt", model_->target_params());
      const auto norm = load_tensors<Scalar>(dir / "normalizer.srlt");
      if (norm.size() != 2) throw std::runtime_error("checkpoint: malformed normalizer");
      model_->normalizer().set(norm[0].col(0), norm[1].col(0));
    }
    if (encoder_) {
      read("encoder.srlt", encoder_->params());
      read("encoder_target.srlt", encoder_->target_params());
    }
  }

  /// Combined hash of every parameter set, for determinism checks.
  std::uint64_t hash() const {
    std::uint64_t h = policy_.params().hash();
    auto mix = [&h](std::uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (int k = 0; k < 2; ++k) {
      mix(critic_.params(k).hash());
      mix(critic_.target(k).hash());
    }
    mix(temperature_.params().hash());
    if (model_) {
      mix(model_->params().hash());
      mix(model_->target_params().hash());
    }
    if (encoder_) {
      mix(encoder_->params().hash());
      mix(encoder_->target_params().hash());
    }
    return h;
  }

 private:
  TrainConfig config_;
  envs::EnvSpec env_;
  actor::SequencePolicy<Scalar> policy_;
  critic::TwinCritic<Scalar> critic_;
  std::optional<model::DynamicsModel<Scalar>> model_;
  actor::Temperature<Scalar> temperature_;
  std::optional<latent::Encoder<Scalar>> encoder_;
};

}  // namespace srl::trainer
