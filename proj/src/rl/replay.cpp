#include "cfmb/rl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfmb/errors.hpp"

namespace cfmb::rl {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("SumTree: zero capacity");
  base_ = 1;
  while (base_ < capacity) base_ <<= 1;
  tree_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t leaf, double value) {
  std::size_t i = base_ + leaf;
  tree_[i] = value;
  // Recompute parents from children so round-off never accumulates.
  for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

std::size_t SumTree::find(double mass) const {
  std::size_t i = 1;
  while (i < base_) {
    const double left = tree_[2 * i];
    if (mass < left || tree_[2 * i + 1] <= 0.0) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  return std::min(i - base_, capacity_ - 1);
}

PrioritizedReplay::PrioritizedReplay(std::size_t capacity, double alpha)
    : items_(capacity), tree_(capacity), alpha_(alpha) {}

void PrioritizedReplay::push(Transition t) {
  items_[next_] = std::move(t);
  tree_.set(next_, std::pow(max_priority_, alpha_));
  next_ = (next_ + 1) % items_.size();
  size_ = std::min(size_ + 1, items_.size());
}

double PrioritizedReplay::priority(std::size_t index) const { return tree_.get(index); }

SampledBatch PrioritizedReplay::sample(std::size_t batch_size, double beta, Rng& rng) const {
  if (size_ == 0) throw StateError("PrioritizedReplay: sampling from an empty buffer");
  SampledBatch b;
  const double total = tree_.total();
  const double seg = total / static_cast<double>(batch_size);
  double max_w = 0.0;
  for (std::size_t i = 0; i < batch_size; ++i) {
    const double mass = std::min((static_cast<double>(i) + uniform01(rng)) * seg, std::nextafter(total, 0.0));
    std::size_t idx = tree_.find(mass);
    if (idx >= size_ || tree_.get(idx) <= 0.0) idx = (next_ + items_.size() - 1) % items_.size();
    const double p = tree_.get(idx) / total;
    const double w = std::pow(static_cast<double>(size_) * p, -beta);
    b.indices.push_back(idx);
    b.weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (auto& w : b.weights) w /= max_w;
  return b;
}

void PrioritizedReplay::update_priority(std::size_t index, double priority) {
  const double p = std::max(priority, 1e-6);
  max_priority_ = std::max(max_priority_, p);
  tree_.set(index, std::pow(p, alpha_));
}

Transition NStepBuffer::make(std::size_t first, const std::vector<double>& next_obs, bool done) const {
  Transition t;
  t.obs = pending_[first].obs;
  t.actions = pending_[first].actions;
  double w = 1.0;
  for (std::size_t k = first; k < pending_.size(); ++k) {
    t.reward += w * pending_[k].reward;
    w *= gamma_;
  }
  t.next_obs = next_obs;
  t.done = done;
  t.discount = done ? 0.0 : w;
  return t;
}

std::vector<Transition> NStepBuffer::push(std::vector<double> obs, std::vector<std::uint32_t> actions, double reward,
                                          const std::vector<double>& next_obs, bool done) {
  pending_.push_back({std::move(obs), std::move(actions), reward});
  std::vector<Transition> out;
  if (done) {
    for (std::size_t i = 0; i < pending_.size(); ++i) out.push_back(make(i, next_obs, true));
    pending_.clear();
  } else if (pending_.size() == n_) {
    out.push_back(make(0, next_obs, false));
    pending_.pop_front();
  }
  return out;
}

}  // namespace cfmb::rl
