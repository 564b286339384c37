#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

#include "cfmb/random.hpp"

namespace cfmb::rl {

/// One n-step transition. `actions` holds a single index for ordinary
/// agents and every selected head for the scheduler.
struct Transition {
  std::vector<double> obs;
  std::vector<std::uint32_t> actions;
  double reward = 0.0;
  std::vector<double> next_obs;
  double discount = 1.0;  // gamma^n, zero when the episode ended
  bool done = false;
};

/// Binary sum tree over leaf priorities.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);
  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return tree_[base_ + leaf]; }
  double total() const { return tree_[1]; }
  // Leaf whose cumulative range contains `mass` (0 <= mass < total).
  std::size_t find(double mass) const;
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> tree_;
};

struct SampledBatch {
  std::vector<std::size_t> indices;
  std::vector<double> weights;  // importance weights, max-normalized
};

/// Proportional prioritized replay with a ring buffer.
class PrioritizedReplay {
 public:
  PrioritizedReplay(std::size_t capacity, double alpha);

  void push(Transition t);
  // Stratified proportional sampling; importance exponent `beta`.
  SampledBatch sample(std::size_t batch_size, double beta, Rng& rng) const;
  void update_priority(std::size_t index, double priority);

  const Transition& at(std::size_t index) const { return items_[index]; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return items_.size(); }
  double alpha() const { return alpha_; }
  double priority(std::size_t index) const;
  // Slot that the next push overwrites.
  std::size_t next_slot() const { return next_; }

 private:
  std::vector<Transition> items_;
  SumTree tree_;
  double alpha_;
  double max_priority_ = 1.0;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
};

/// Turns per-step (obs, actions, reward) into n-step transitions.
class NStepBuffer {
 public:
  NStepBuffer(std::size_t n, double gamma) : n_(n), gamma_(gamma) {}

  // Records an action taken in `obs` and the reward that followed. Returns
  // the transitions that became complete, whose next observation is `next_obs`.
  std::vector<Transition> push(std::vector<double> obs, std::vector<std::uint32_t> actions, double reward,
                               const std::vector<double>& next_obs, bool done);
  void clear() { pending_.clear(); }
  std::size_t pending() const { return pending_.size(); }

 private:
  struct Step {
    std::vector<double> obs;
    std::vector<std::uint32_t> actions;
    double reward;
  };
  Transition make(std::size_t first, const std::vector<double>& next_obs, bool done) const;

  std::size_t n_;
  double gamma_;
  std::deque<Step> pending_;
};

}  // namespace cfmb::rl
