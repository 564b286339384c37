#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfmb/agents/observation.hpp"
#include "cfmb/engine.hpp"
#include "cfmb/rl/rainbow.hpp"

namespace cfmb::agents {

/// Hyperparameters shared by the learned controllers.
struct AgentConfig {
  std::vector<std::size_t> conv_channels{16, 32, 32, 32, 32};
  std::size_t hidden = 128;
  std::size_t stream_hidden = 128;
  std::vector<std::size_t> scheduler_conv{16, 32, 32};
  std::size_t scheduler_hidden = 128;
  std::size_t atoms = 21;
  std::size_t scheduler_atoms = 11;
  double noisy_sigma0 = 0.5;
  double dropout = 0.2;

  double lr = 6.25e-5;
  double adam_eps = 1.5e-4;
  double clip_norm = 10.0;
  double gamma = 1.0;
  double scheduler_gamma = 1.0;
  std::size_t n_step = 3;
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 20000;
  std::size_t learn_start = 256;
  std::size_t target_sync = 1000;
  double priority_alpha = 0.5;
  double beta_start = 0.4;
  std::size_t beta_anneal_steps = 100000;

  double boltzmann_beta = 100.0;
  double boltzmann_sign = 1.0;
  bool greedy_eval = false;  // evaluation picks argmax instead of sampling

  double reward_scale = 1.0;  // multiplies V-PSNR gains before storage
  double vmax = 0.0;          // association support upper end; <= 0 selects users * cap * reward_scale
  double scheduler_vmax = 0.0;
  std::size_t action_cap = 4096;
  RequesterMode requester_map = RequesterMode::Schedule;
  std::size_t scheduler_train_steps = 1;  // updates per completed option

  void validate() const;
};

/// Policies whose parameters live in a checkpoint directory.
class Checkpointable {
 public:
  virtual ~Checkpointable() = default;
  virtual void save(const std::filesystem::path& dir) const = 0;
  virtual void load(const std::filesystem::path& dir) = 0;
};

/// One step of a distributed agent, for offline embedding analysis.
struct ExportRecord {
  std::uint64_t episode_seed = 0;
  std::size_t global_slot = 0;
  std::size_t ap = 0;
  std::vector<double> observation;
  std::vector<double> hidden;
  std::size_t action = 0;
};
using ExportSink = std::function<void(const ExportRecord&)>;

/// One Rainbow agent per AP on local observations, Boltzmann action
/// sampling, optional federated averaging of all agents' parameters.
class DistributedAssociation final : public AssociationPolicy, public Checkpointable {
 public:
  DistributedAssociation(const SimConfig& sim, const AgentConfig& cfg, bool federated, std::uint64_t seed);

  std::string name() const override { return federated_ ? "distributed" : "distributed_nofl"; }
  void begin_episode(const EpisodeState& state, std::uint64_t seed) override;
  VirtualCellMap decide(const EpisodeState& state) override;
  void observe(const EpisodeState& after, const SlotResult& result, bool episode_done) override;
  std::unique_ptr<AssociationPolicy> clone() const override;

  void save(const std::filesystem::path& dir) const override;
  void load(const std::filesystem::path& dir) override;

  std::size_t n_agents() const { return agents_.size(); }
  rl::RainbowAgent& agent(std::size_t b) { return *agents_.at(b); }
  const rl::RainbowAgent& agent(std::size_t b) const { return *agents_.at(b); }
  bool federated() const { return federated_; }
  std::size_t fedavg_calls() const { return fedavg_calls_; }
  std::size_t steps() const { return steps_; }
  // Replaces every agent's online and target parameters with the mean.
  void federated_average();
  void set_export_sink(ExportSink sink) { export_ = std::move(sink); }

  // Per-AP action choice from precomputed expectations (Boltzmann or greedy).
  std::size_t choose(std::size_t ap, const std::vector<double>& q);

 private:
  struct Pending {
    std::vector<double> obs;
    std::uint32_t action = 0;
    double reward = 0.0;
  };
  void flush_pending(const std::vector<std::vector<double>>* next_obs, bool done);
  void train();

  SimConfig sim_;
  AgentConfig cfg_;
  ObservationSpec obs_spec_;
  bool federated_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<rl::RainbowAgent>> agents_;
  std::vector<rl::NStepBuffer> nstep_;
  std::vector<Rng> policy_rng_;
  std::vector<Pending> pending_;
  bool has_pending_ = false;
  std::size_t steps_ = 0;
  std::size_t fedavg_calls_ = 0;
  std::uint64_t episode_seed_ = 0;
  ExportSink export_;
};

/// A single Rainbow agent choosing the joint association over all APs.
class CentralizedAssociation final : public AssociationPolicy, public Checkpointable {
 public:
  CentralizedAssociation(const SimConfig& sim, const AgentConfig& cfg, std::uint64_t seed);

  std::string name() const override { return "centralized"; }
  void begin_episode(const EpisodeState& state, std::uint64_t seed) override;
  VirtualCellMap decide(const EpisodeState& state) override;
  void observe(const EpisodeState& after, const SlotResult& result, bool episode_done) override;
  std::unique_ptr<AssociationPolicy> clone() const override;

  void save(const std::filesystem::path& dir) const override;
  void load(const std::filesystem::path& dir) override;

  rl::RainbowAgent& agent() { return *agent_; }
  std::size_t action_count() const { return actions_; }

 private:
  SimConfig sim_;
  AgentConfig cfg_;
  ObservationSpec obs_spec_;
  std::uint64_t seed_;
  std::size_t actions_;
  std::unique_ptr<rl::RainbowAgent> agent_;
  rl::NStepBuffer nstep_;
  std::vector<double> pending_obs_;
  std::uint32_t pending_action_ = 0;
  double pending_reward_ = 0.0;
  bool has_pending_ = false;
  std::size_t steps_ = 0;
};

/// Meta-controller: per-tile distributional heads whose expectations act as
/// scheduling priorities; trained on whole-option returns.
class LearnedScheduler final : public SchedulerPolicy, public Checkpointable {
 public:
  LearnedScheduler(const SimConfig& sim, const AgentConfig& cfg, std::uint64_t seed);

  std::string name() const override { return "learned"; }
  void begin_episode(const EpisodeState& state, std::uint64_t seed) override;
  Schedule decide(const EpisodeState& state) override;
  void option_end(const EpisodeState& after, double option_reward, bool episode_done) override;
  std::unique_ptr<SchedulerPolicy> clone() const override;

  void save(const std::filesystem::path& dir) const override;
  void load(const std::filesystem::path& dir) override;

  rl::RainbowAgent& agent() { return *agent_; }
  std::size_t options() const { return options_; }

 private:
  SimConfig sim_;
  AgentConfig cfg_;
  ObservationSpec obs_spec_;
  std::uint64_t seed_;
  std::unique_ptr<rl::RainbowAgent> agent_;
  std::vector<double> pending_obs_;
  std::vector<std::uint32_t> pending_actions_;
  double pending_reward_ = 0.0;
  bool has_pending_ = false;
  std::size_t options_ = 0;
};

/// Names accepted by make_agent_bundle.
const std::vector<std::string>& agent_names();

/// "centralized", "distributed", "distributed_nofl" run under P-PF;
/// "hierarchical", "hierarchical_nofl" pair the learned scheduler with
/// distributed association.
PolicyBundle make_agent_bundle(const std::string& name, const SimConfig& sim, const AgentConfig& cfg,
                               std::uint64_t seed);

/// Saves / loads every checkpointable part of a bundle.
void save_bundle(const PolicyBundle& bundle, const std::filesystem::path& dir);
void load_bundle(PolicyBundle& bundle, const std::filesystem::path& dir);

}  // namespace cfmb::agents
