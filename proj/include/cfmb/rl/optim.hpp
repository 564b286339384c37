#pragma once

#include <cstddef>

#include "cfmb/rl/params.hpp"

namespace cfmb::rl {

struct AdamConfig {
  double lr = 6.25e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1.5e-4;
  double clip_norm = 10.0;  // global gradient norm; <= 0 disables
};

struct AdamState {
  AgentParams m;
  AgentParams v;
  std::size_t t = 0;
  std::size_t skipped = 0;  // steps rejected for non-finite gradients

  AdamState() = default;
  explicit AdamState(const AgentParams& like) : m(like.zeros_like()), v(like.zeros_like()) {}
};

/// One Adam update. Returns false (and leaves params and moments untouched)
/// when any gradient entry is non-finite.
bool grad_step(AgentParams& params, const AgentParams& grads, AdamState& state, const AdamConfig& cfg = {});

double global_norm(const AgentParams& grads);

}  // namespace cfmb::rl
