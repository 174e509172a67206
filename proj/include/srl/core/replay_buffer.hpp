#pragma once

#include "srl/core/rng.hpp"
#include "srl/core/transition.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace srl {

/// Bounded FIFO replay pool with uniform sampling (with replacement).
///
/// Storage is a ring of flat float arrays. Each slot also remembers which
/// episode it came from, so contiguous windows can be re-sliced later.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
      : capacity_(capacity), ds_(state_dim), da_(action_dim) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    if (state_dim <= 0 || action_dim <= 0) {
      throw std::invalid_argument("ReplayBuffer: dimensions must be positive");
    }
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  int state_dim() const { return ds_; }
  int action_dim() const { return da_; }
  /// Total number of transitions ever pushed.
  std::uint64_t pushed() const { return pushed_; }

  void push(const Transition& t) {
    require_dim(t.state.size(), ds_, "ReplayBuffer::push state");
    require_dim(t.action.size(), da_, "ReplayBuffer::push action");
    require_dim(t.next_state.size(), ds_, "ReplayBuffer::push next_state");
    if (!t.finite()) throw NumericError("ReplayBuffer::push: non-finite transition");

    const std::size_t slot = head_;
    ensure_slot_(slot);
    std::copy(t.state.data(), t.state.data() + ds_, states_.data() + slot * ds_);
    std::copy(t.action.data(), t.action.data() + da_, actions_.data() + slot * da_);
    std::copy(t.next_state.data(), t.next_state.data() + ds_, next_states_.data() + slot * ds_);
    rewards_[slot] = t.reward;
    flags_[slot] = static_cast<std::uint8_t>((t.done ? 1 : 0) | (t.truncated ? 2 : 0));
    episodes_[slot] = episode_;
    order_[slot] = pushed_;

    head_ = (head_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
    ++pushed_;
    if (t.done || t.truncated) ++episode_;
  }

  /// Marks the current episode as finished without a terminal transition,
  /// e.g. when a run stops mid-episode.
  void end_episode() { ++episode_; }

  /// Transition at logical position i, 0 being the oldest stored entry.
  Transition at(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("ReplayBuffer::at");
    return slot_(physical_(i));
  }

  std::uint64_t episode_at(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("ReplayBuffer::episode_at");
    return episodes_[physical_(i)];
  }

  /// Draws n slot indices uniformly with replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const {
    if (size_ < n || size_ == 0) {
      throw std::runtime_error("ReplayBuffer::sample: requested " + std::to_string(n) +
                               " transitions but only " + std::to_string(size_) +
                               " stored (insufficient warm-up)");
    }
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = pick(rng);
    return idx;
  }

  /// Gathers logical indices into a column-stacked batch.
  template <typename Scalar = Real>
  TransitionBatch<Scalar> gather(const std::vector<std::size_t>& logical) const {
    const auto n = static_cast<Eigen::Index>(logical.size());
    TransitionBatch<Scalar> b{Matrix<Scalar>(ds_, n), Matrix<Scalar>(da_, n), RowVector<Scalar>(n),
                              Matrix<Scalar>(ds_, n), RowVector<Scalar>(n)};
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t i = logical[static_cast<std::size_t>(c)];
      if (i >= size_) throw std::out_of_range("ReplayBuffer::gather");
      const std::size_t p = physical_(i);
      for (int k = 0; k < ds_; ++k) {
        b.states(k, c) = static_cast<Scalar>(states_[p * ds_ + k]);
        b.next_states(k, c) = static_cast<Scalar>(next_states_[p * ds_ + k]);
      }
      for (int k = 0; k < da_; ++k) b.actions(k, c) = static_cast<Scalar>(actions_[p * da_ + k]);
      b.rewards(c) = static_cast<Scalar>(rewards_[p]);
      b.dones(c) = (flags_[p] & 1) ? Scalar(1) : Scalar(0);
    }
    return b;
  }

  template <typename Scalar = Real>
  TransitionBatch<Scalar> sample(std::size_t n, Rng& rng) const {
    return gather<Scalar>(sample_indices(n, rng));
  }

  /// Action executed just before each indexed transition within its episode,
  /// or zero at an episode start (or when the predecessor was evicted).
  template <typename Scalar = Real>
  Matrix<Scalar> previous_actions(const std::vector<std::size_t>& logical) const {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(da_, static_cast<Eigen::Index>(logical.size()));
    for (std::size_t c = 0; c < logical.size(); ++c) {
      const std::size_t i = logical[c];
      if (i >= size_) throw std::out_of_range("ReplayBuffer::previous_actions");
      if (i == 0 || !contiguous(i - 1, 2)) continue;
      const std::size_t p = physical_(i - 1);
      for (int k = 0; k < da_; ++k) out(k, static_cast<Eigen::Index>(c)) = static_cast<Scalar>(actions_[p * da_ + k]);
    }
    return out;
  }

  /// True when logical entries [start, start + length) belong to one episode
  /// and were pushed consecutively.
  bool contiguous(std::size_t start, std::size_t length) const {
    if (length == 0 || start + length > size_) return false;
    const std::size_t first = physical_(start);
    for (std::size_t k = 1; k < length; ++k) {
      const std::size_t p = physical_(start + k);
      const std::size_t q = physical_(start + k - 1);
      if (episodes_[p] != episodes_[first] || order_[p] != order_[q] + 1) return false;
      if (flags_[q] != 0) return false;
    }
    return true;
  }

 private:
  // Storage grows geometrically up to capacity instead of reserving it all.
  void ensure_slot_(std::size_t slot) {
    if (slot < rewards_.size()) return;
    const std::size_t n = std::min(capacity_, std::max<std::size_t>(1024, 2 * rewards_.size()));
    states_.resize(n * ds_);
    next_states_.resize(n * ds_);
    actions_.resize(n * da_);
    rewards_.resize(n);
    flags_.resize(n);
    episodes_.resize(n);
    order_.resize(n);
  }

  std::size_t physical_(std::size_t logical) const {
    const std::size_t oldest = size_ < capacity_ ? 0 : head_;
    return (oldest + logical) % capacity_;
  }

  Transition slot_(std::size_t p) const {
    Transition t;
    t.state = Eigen::Map<const Vector<Real>>(states_.data() + p * ds_, ds_);
    t.action = Eigen::Map<const Vector<Real>>(actions_.data() + p * da_, da_);
    t.next_state = Eigen::Map<const Vector<Real>>(next_states_.data() + p * ds_, ds_);
    t.reward = rewards_[p];
    t.done = flags_[p] & 1;
    t.truncated = flags_[p] & 2;
    return t;
  }

  std::size_t capacity_;
  int ds_;
  int da_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  std::uint64_t pushed_ = 0;
  std::uint64_t episode_ = 0;
  std::vector<float> states_, next_states_, actions_, rewards_;
  std::vector<std::uint8_t> flags_;
  std::vector<std::uint64_t> episodes_, order_;
};

}  // namespace srl
