#pragma once

#include "srl/nets/parameter_set.hpp"

#include <string>
#include <type_traits>
#include <vector>

namespace srl::nets {

struct GatedRecurrentCellSpec {
  int input_dim = 0;
  int hidden_dim = 256;
};

template <typename Scalar>
struct GruStepCache {
  Matrix<Scalar> x, h, r, z, n, hn;  // hn = W_hn h + b_hn, needed by the reset-gate gradient
};

/// Gated recurrent unit with reset (r), update (z) and candidate (n) gates:
///   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
///   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
///   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - z) * n + z * h
/// Gate blocks are stacked r, z, n along the rows of each weight.
template <typename Scalar>
class GruCell {
 public:
  GruCell() = default;

  GruCell(const GatedRecurrentCellSpec& spec, ParameterSet<Scalar>& params, const std::string& prefix)
      : spec_(spec) {
    if (spec.input_dim <= 0 || spec.hidden_dim <= 0) {
      throw std::invalid_argument("GruCell: dimensions must be positive");
    }
    const int h3 = 3 * spec.hidden_dim;
    w_input_ = params.add(prefix + "weight_ih", h3, spec.input_dim);
    w_hidden_ = params.add(prefix + "weight_hh", h3, spec.hidden_dim);
    b_input_ = params.add(prefix + "bias_ih", h3, 1);
    b_hidden_ = params.add(prefix + "bias_hh", h3, 1);
  }

  const GatedRecurrentCellSpec& spec() const { return spec_; }

  void initialize(ParameterSet<Scalar>& params, Rng& rng) const {
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(spec_.hidden_dim));
    for (auto idx : {w_input_, w_hidden_, b_input_, b_hidden_}) {
      auto& t = params[idx];
      t = uniform<Scalar>(t.rows(), t.cols(), -bound, bound, rng);
    }
  }

  Matrix<Scalar> step(const ParameterSet<Scalar>& params, const Matrix<Scalar>& x,
                      const Matrix<Scalar>& h, GruStepCache<Scalar>* cache = nullptr) const {
    require_dim(x.rows(), spec_.input_dim, "GruCell::step input");
    require_dim(h.rows(), spec_.hidden_dim, "GruCell::step hidden");
    if (x.cols() != h.cols()) throw DimensionError("GruCell::step: batch size mismatch");
    const Eigen::Index H = spec_.hidden_dim;
    Matrix<Scalar> gi(3 * H, x.cols());
    gi.noalias() = params[w_input_] * x;
    gi.colwise() += params[b_input_].col(0);
    Matrix<Scalar> gh(3 * H, x.cols());
    gh.noalias() = params[w_hidden_] * h;
    gh.colwise() += params[b_hidden_].col(0);

    Matrix<Scalar> r = sigmoid_(gi.topRows(H) + gh.topRows(H));
    Matrix<Scalar> z = sigmoid_(gi.middleRows(H, H) + gh.middleRows(H, H));
    Matrix<Scalar> hn = gh.bottomRows(H);
    Matrix<Scalar> n = (gi.bottomRows(H).array() + r.array() * hn.array()).tanh().matrix();
    Matrix<Scalar> out = ((Scalar(1) - z.array()) * n.array() + z.array() * h.array()).matrix();
    if (cache) {
      cache->x = x;
      cache->h = h;
      cache->r = std::move(r);
      cache->z = std::move(z);
      cache->n = std::move(n);
      cache->hn = std::move(hn);
    }
    return out;
  }

  /// Given dL/dh', accumulates parameter gradients, writes dL/dx into `dx`
  /// when non-null and returns dL/dh.
  Matrix<Scalar> backward(const ParameterSet<Scalar>& params, const GruStepCache<Scalar>& c,
                          const Matrix<Scalar>& dout, ParameterSet<Scalar>* grads,
                          Matrix<Scalar>* dx) const {
    const Eigen::Index H = spec_.hidden_dim;
    const auto B = dout.cols();
    auto one = Scalar(1);
    Matrix<Scalar> dh = (dout.array() * c.z.array()).matrix();
    const auto dn = (dout.array() * (one - c.z.array())).eval();
    const auto dz = (dout.array() * (c.h.array() - c.n.array())).eval();
    const auto dn_pre = (dn * (one - c.n.array().square())).eval();

    Matrix<Scalar> dgi(3 * H, B), dgh(3 * H, B);
    const auto dr_pre = (dn_pre * c.hn.array() * c.r.array() * (one - c.r.array())).eval();
    const auto dz_pre = (dz * c.z.array() * (one - c.z.array())).eval();
    dgi.topRows(H) = dr_pre.matrix();
    dgi.middleRows(H, H) = dz_pre.matrix();
    dgi.bottomRows(H) = dn_pre.matrix();
    dgh.topRows(H) = dr_pre.matrix();
    dgh.middleRows(H, H) = dz_pre.matrix();
    dgh.bottomRows(H) = (dn_pre * c.r.array()).matrix();

    if (grads) {
      (*grads)[w_input_].noalias() += dgi * c.x.transpose();
      (*grads)[w_hidden_].noalias() += dgh * c.h.transpose();
      (*grads)[b_input_] += dgi.rowwise().sum();
      (*grads)[b_hidden_] += dgh.rowwise().sum();
    }
    if (dx) {
      dx->resize(spec_.input_dim, B);
      dx->noalias() = params[w_input_].transpose() * dgi;
    }
    dh.noalias() += params[w_hidden_].transpose() * dgh;
    return dh;
  }

 private:
  static Matrix<Scalar> sigmoid_(const Matrix<Scalar>& v) {
    return (Scalar(1) / (Scalar(1) + (-v.array()).exp())).matrix();
  }

  GatedRecurrentCellSpec spec_;
  std::size_t w_input_ = 0, w_hidden_ = 0, b_input_ = 0, b_hidden_ = 0;
};

/// Runs the cell over an input list from a single initial hidden state.
template <typename Scalar>
std::vector<Vector<Scalar>> gru_unroll(const GruCell<Scalar>& cell, const std::type_identity_t<ParameterSet<Scalar>>& params,
                                       const std::type_identity_t<Vector<Scalar>>& initial_hidden,
                                       const std::type_identity_t<std::vector<Vector<Scalar>>>& inputs) {
  require_dim(initial_hidden.size(), cell.spec().hidden_dim, "gru_unroll hidden");
  std::vector<Vector<Scalar>> hiddens;
  hiddens.reserve(inputs.size());
  Matrix<Scalar> h = initial_hidden;
  for (const auto& x : inputs) {
    require_dim(x.size(), cell.spec().input_dim, "gru_unroll input");
    h = cell.step(params, Matrix<Scalar>(x), h);
    hiddens.emplace_back(h.col(0));
  }
  return hiddens;
}

}  // namespace srl::nets
