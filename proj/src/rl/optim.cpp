#include "cfmb/rl/optim.hpp"

#include <cmath>

#include "cfmb/errors.hpp"

namespace cfmb::rl {

double global_norm(const AgentParams& grads) {
  double s = 0.0;
  for (const auto& t : grads.tensors())
    for (double g : t.values) s += g * g;
  return std::sqrt(s);
}

bool grad_step(AgentParams& params, const AgentParams& grads, AdamState& state, const AdamConfig& cfg) {
  if (!params.same_layout(grads) || !params.same_layout(state.m))
    throw StructuralError("grad_step: parameter and gradient layouts differ");
  if (!grads.all_finite()) {
    ++state.skipped;
    return false;
  }
  double scale = 1.0;
  if (cfg.clip_norm > 0.0) {
    const double n = global_norm(grads);
    if (n > cfg.clip_norm) scale = cfg.clip_norm / n;
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const double step = cfg.lr * std::sqrt(bc2) / bc1;
  for (std::size_t i = 0; i < params.count(); ++i) {
    auto& p = params.tensor(i).values;
    const auto& g = grads.tensor(i).values;
    auto& m = state.m.tensor(i).values;
    auto& v = state.v.tensor(i).values;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j] * scale;
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
      p[j] -= step * m[j] / (std::sqrt(v[j]) + cfg.eps);
    }
  }
  return true;
}

}  // namespace cfmb::rl
