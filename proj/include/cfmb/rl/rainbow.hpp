#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cfmb/random.hpp"
#include "cfmb/rl/distributional.hpp"
#include "cfmb/rl/network.hpp"
#include "cfmb/rl/optim.hpp"
#include "cfmb/rl/replay.hpp"

namespace cfmb::rl {

struct RainbowConfig {
  NetConfig net;
  double vmin = 0.0;
  double vmax = 1.0;
  double gamma = 1.0;
  std::size_t n_step = 3;
  std::size_t replay_capacity = 20000;
  std::size_t batch_size = 32;
  std::size_t learn_start = 256;  // replay size before updates begin
  AdamConfig adam;
  double priority_alpha = 0.5;
  double beta_start = 0.4;
  double beta_end = 1.0;
  std::size_t beta_anneal_steps = 100000;
  std::size_t target_sync = 1000;
  bool double_q = true;

  Support support() const { return Support(vmin, vmax, net.n_atoms); }
};

/// Batched distributional loss: for sample b, every action in actions[b] is
/// pulled toward targets[b]. Returns the weighted mean KL and, when asked,
/// accumulates gradients and reports per-sample KL (averaged over actions).
double distributional_loss(const RainbowNet& net, const Eigen::MatrixXd& obs,
                           const std::vector<std::vector<std::uint32_t>>& actions,
                           const std::vector<std::vector<double>>& targets, std::span<const double> weights,
                           AgentParams* grads = nullptr, std::vector<double>* per_sample = nullptr,
                           Rng* dropout_rng = nullptr);

/// Online/target network pair with replay and optimizer state.
class RainbowAgent {
 public:
  RainbowAgent(const RainbowConfig& cfg, std::uint64_t seed);

  const RainbowConfig& config() const { return cfg_; }
  const Support& support() const { return support_; }

  /// Per-action categorical distributions (atoms x actions). With `explore`
  /// fresh noise is drawn; otherwise the noise-free mean network is used.
  Eigen::MatrixXd distributions(const std::vector<double>& obs, bool explore);
  std::vector<double> q_values(const std::vector<double>& obs, bool explore);
  Eigen::VectorXd hidden(const std::vector<double>& obs) const;

  void store(Transition t) { replay_.push(std::move(t)); }
  PrioritizedReplay& replay() { return replay_; }

  /// One update when the replay is warm; returns the mean loss.
  std::optional<double> train_step();

  const AgentParams& params() const { return online_.params(); }
  const AgentParams& target_params() const { return target_.params(); }
  void set_params(const AgentParams& p);
  void set_target_params(const AgentParams& p);
  void sync_target() { target_.params() = online_.params(); }

  std::size_t updates() const { return updates_; }
  const AdamState& optimizer() const { return adam_; }
  double current_beta() const;
  Rng& act_rng() { return act_rng_; }

 private:
  RainbowConfig cfg_;
  Support support_;
  RainbowNet online_;
  RainbowNet target_;
  AdamState adam_;
  PrioritizedReplay replay_;
  Rng act_rng_;
  Rng train_rng_;
  std::size_t updates_ = 0;
};

}  // namespace cfmb::rl
