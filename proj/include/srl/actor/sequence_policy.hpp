#pragma once

#include "srl/core/action_sequence.hpp"
#include "srl/nets/feed_forward.hpp"
#include "srl/nets/gru.hpp"

#include <numbers>
#include <vector>

namespace srl::actor {

struct PolicySpec {
  int state_dim = 0;
  int action_dim = 0;
  int hidden_size = 256;
  int num_hidden_layers = 2;
  double log_std_min = -20.0;
  double log_std_max = 2.0;
};

/// Everything one batched sequence draw needs for backpropagation.
/// Index k runs over sequence positions 0..J-1.
template <typename Scalar>
struct SequenceDraw {
  nets::FeedForwardCache<Scalar> trunk;
  std::vector<nets::GruStepCache<Scalar>> cells;
  std::vector<nets::FeedForwardCache<Scalar>> mean_head, log_std_head;
  std::vector<Matrix<Scalar>> hidden;       // state after step k, H x B
  std::vector<Matrix<Scalar>> mean;         // d_a x B
  std::vector<Matrix<Scalar>> log_std;      // clamped
  std::vector<Matrix<Scalar>> noise;        // reparameterization noise
  std::vector<Matrix<Scalar>> actions;      // tanh-squashed
  std::vector<RowVector<Scalar>> log_probs; // 1 x B, includes the tanh correction
  std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> clamped;

  int length() const { return static_cast<int>(actions.size()); }
};

namespace detail {

template <typename Derived>
auto softplus(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.cwiseMax(Scalar(0)) + (-x.abs()).exp().log1p();
}

}  // namespace detail

/// Sequence policy: a feed-forward trunk embeds the observation into the
/// initial recurrent state, then a GRU fed the previous action produces one
/// hidden state per position; linear heads give the Gaussian mean and
/// log-std of each action before tanh squashing.
template <typename Scalar>
class SequencePolicy {
 public:
  using Params = nets::ParameterSet<Scalar>;

  SequencePolicy() = default;

  SequencePolicy(const PolicySpec& spec, Rng& rng) : spec_(spec) {
    if (spec.num_hidden_layers < 1) throw std::invalid_argument("SequencePolicy: need at least one trunk layer");
    // Trunk ends in tanh so the initial recurrent state lies in (-1, 1).
    trunk_ = nets::FeedForward<Scalar>({spec.state_dim, spec.hidden_size, spec.hidden_size,
                                        spec.num_hidden_layers - 1, nets::Activation::relu,
                                        nets::Activation::tanh},
                                       params_, "actor.trunk.");
    cell_ = nets::GruCell<Scalar>({spec.action_dim, spec.hidden_size}, params_, "actor.gru.");
    mean_head_ = nets::FeedForward<Scalar>({spec.hidden_size, spec.action_dim, spec.hidden_size, 0},
                                           params_, "actor.mean.");
    log_std_head_ = nets::FeedForward<Scalar>({spec.hidden_size, spec.action_dim, spec.hidden_size, 0},
                                              params_, "actor.log_std.");
    trunk_.initialize(params_, rng);
    cell_.initialize(params_, rng);
    mean_head_.initialize(params_, rng);
    log_std_head_.initialize(params_, rng);
  }

  const PolicySpec& spec() const { return spec_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }
  const nets::GruCell<Scalar>& cell() const { return cell_; }

  std::vector<Matrix<Scalar>> draw_noise(int length, Eigen::Index batch, Rng& rng) const {
    std::vector<Matrix<Scalar>> noise;
    noise.reserve(static_cast<std::size_t>(length));
    for (int k = 0; k < length; ++k) noise.push_back(standard_normal<Scalar>(spec_.action_dim, batch, rng));
    return noise;
  }

  /// Batched draw of `noise.size()` actions per state. Zero noise gives the
  /// deterministic (squashed-mean) sequence. `initial_input` replaces the zero
  /// recurrent input of position 0 when given.
  SequenceDraw<Scalar> forward(const Params& p, const Matrix<Scalar>& states,
                               const std::vector<Matrix<Scalar>>& noise,
                               const Matrix<Scalar>* initial_input = nullptr) const {
    require_dim(states.rows(), spec_.state_dim, "SequencePolicy state");
    if (noise.empty()) throw std::invalid_argument("SequencePolicy: sequence length must be >= 1");
    const Eigen::Index B = states.cols();
    const int J = static_cast<int>(noise.size());
    const Scalar lo = static_cast<Scalar>(spec_.log_std_min);
    const Scalar hi = static_cast<Scalar>(spec_.log_std_max);
    const Scalar log_norm = static_cast<Scalar>(0.5 * std::log(2.0 * std::numbers::pi));
    const Scalar log2 = static_cast<Scalar>(std::numbers::ln2);

    SequenceDraw<Scalar> d;
    d.cells.resize(J);
    d.mean_head.resize(J);
    d.log_std_head.resize(J);
    Matrix<Scalar> h = trunk_.forward(p, states, &d.trunk);
    Matrix<Scalar> input = Matrix<Scalar>::Zero(spec_.action_dim, B);
    if (initial_input) {
      require_dim(initial_input->rows(), spec_.action_dim, "SequencePolicy initial input");
      if (initial_input->cols() != B) throw DimensionError("SequencePolicy: initial input batch mismatch");
      input = *initial_input;
    }
    for (int k = 0; k < J; ++k) {
      const auto& eps = noise[static_cast<std::size_t>(k)];
      if (eps.rows() != spec_.action_dim || eps.cols() != B) {
        throw DimensionError("SequencePolicy: noise shape mismatch");
      }
      h = cell_.step(p, input, h, &d.cells[k]);
      Matrix<Scalar> mu = mean_head_.forward(p, h, &d.mean_head[k]);
      Matrix<Scalar> raw = log_std_head_.forward(p, h, &d.log_std_head[k]);
      auto clamped = ((raw.array() < lo) || (raw.array() > hi)).eval();
      Matrix<Scalar> ls = raw.cwiseMax(lo).cwiseMin(hi);
      Matrix<Scalar> u = (mu.array() + ls.array().exp() * eps.array()).matrix();
      Matrix<Scalar> a = u.array().tanh().matrix();
      // log N(u; mu, sigma) - log(1 - tanh(u)^2), the latter as 2 (log 2 - u - softplus(-2u)).
      auto log_jac = (Scalar(2) * (log2 - u.array() - detail::softplus((Scalar(-2) * u.array()).eval()))).eval();
      RowVector<Scalar> lp =
          (Scalar(-0.5) * eps.array().square() - ls.array() - log_norm - log_jac).colwise().sum().matrix();
      input = a;
      d.hidden.push_back(h);
      d.mean.push_back(std::move(mu));
      d.log_std.push_back(std::move(ls));
      d.noise.push_back(eps);
      d.actions.push_back(std::move(a));
      d.log_probs.push_back(std::move(lp));
      d.clamped.push_back(std::move(clamped));
    }
    return d;
  }

  /// Backpropagates dL/d(actions) and dL/d(log_probs) of a draw into `grads`.
  /// The noise is treated as a constant (reparameterization).
  void backward(const Params& p, const SequenceDraw<Scalar>& d, const std::vector<Matrix<Scalar>>& d_actions,
                const std::vector<RowVector<Scalar>>& d_log_probs, Params* grads) const {
    const int J = d.length();
    if (static_cast<int>(d_actions.size()) != J || static_cast<int>(d_log_probs.size()) != J) {
      throw DimensionError("SequencePolicy::backward: gradient list length mismatch");
    }
    const Eigen::Index B = d.actions.front().cols();
    Matrix<Scalar> carry_h = Matrix<Scalar>::Zero(spec_.hidden_size, B);
    Matrix<Scalar> carry_a = Matrix<Scalar>::Zero(spec_.action_dim, B);
    for (int k = J - 1; k >= 0; --k) {
      const auto& a = d.actions[k].array();
      Matrix<Scalar> da = d_actions[k] + carry_a;
      const auto dlp = d_log_probs[k].array();
      // d logp / du = 2 tanh(u) from the squashing correction; the Gaussian term is
      // constant in u under reparameterization except through -log sigma.
      Matrix<Scalar> du = (da.array() * (Scalar(1) - a.square())).matrix();
      du.array() += (Scalar(2) * a).rowwise() * dlp;
      Matrix<Scalar> dls = (du.array() * d.log_std[k].array().exp() * d.noise[k].array()).matrix();
      dls.array().rowwise() -= dlp;
      dls = d.clamped[k].select(Scalar(0), dls);

      Matrix<Scalar> dh = mean_head_.backward(p, d.mean_head[k], std::move(du), grads);
      dh += log_std_head_.backward(p, d.log_std_head[k], std::move(dls), grads);
      dh += carry_h;
      Matrix<Scalar> dx;
      carry_h = cell_.backward(p, d.cells[k], dh, grads, &dx);
      carry_a = std::move(dx);
    }
    trunk_.backward(p, d.trunk, std::move(carry_h), grads);
  }

  /// Samples one sequence for a single observation.
  ActionSequence sample_sequence(const Vector<Real>& state, int length, Rng& rng, bool deterministic,
                                 const Vector<Real>* previous_action = nullptr) const {
    if (length < 1) throw std::invalid_argument("sample_sequence: length must be >= 1");
    std::vector<Matrix<Scalar>> noise =
        deterministic ? std::vector<Matrix<Scalar>>(length, Matrix<Scalar>::Zero(spec_.action_dim, 1))
                      : draw_noise(length, 1, rng);
    Matrix<Scalar> prev;
    if (previous_action) prev = previous_action->cast<Scalar>();
    const auto d = forward(params_, Matrix<Scalar>(state.cast<Scalar>()), noise,
                           previous_action ? &prev : nullptr);
    ActionSequence seq;
    seq.origin_state = state;
    for (int k = 0; k < length; ++k) {
      seq.actions.emplace_back(d.actions[k].col(0).template cast<Real>());
      seq.log_probs.push_back(static_cast<Real>(d.log_probs[k](0)));
    }
    return seq;
  }

  /// Deterministic sequences for a batch of observations (columns), d_a x B per position.
  std::vector<Matrix<Scalar>> mean_actions(const Matrix<Scalar>& states, int length) const {
    std::vector<Matrix<Scalar>> noise(length, Matrix<Scalar>::Zero(spec_.action_dim, states.cols()));
    return forward(params_, states, noise).actions;
  }

 private:
  PolicySpec spec_;
  Params params_;
  nets::FeedForward<Scalar> trunk_;
  nets::GruCell<Scalar> cell_;
  nets::FeedForward<Scalar> mean_head_;
  nets::FeedForward<Scalar> log_std_head_;
};

}  // namespace srl::actor
