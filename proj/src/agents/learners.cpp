#include "cfmb/agents/learners.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "cfmb/agents/baselines.hpp"
#include "cfmb/errors.hpp"

namespace cfmb::agents {

namespace fs = std::filesystem;

void AgentConfig::validate() const {
  auto positive = [](std::size_t v, const char* key) {
    if (v == 0) throw ConfigError(std::string("agent.") + key + ": must be at least 1");
  };
  positive(hidden, "hidden");
  positive(stream_hidden, "stream_hidden");
  positive(scheduler_hidden, "scheduler_hidden");
  positive(n_step, "n_step");
  positive(batch_size, "batch_size");
  positive(replay_capacity, "replay_capacity");
  positive(action_cap, "action_cap");
  if (atoms < 2) throw ConfigError("agent.atoms: need at least 2 atoms");
  if (scheduler_atoms < 2) throw ConfigError("agent.scheduler_atoms: need at least 2 atoms");
  for (auto c : conv_channels) positive(c, "conv_channels");
  for (auto c : scheduler_conv) positive(c, "scheduler_conv");
  if (!(lr > 0.0)) throw ConfigError("agent.lr: must be positive");
  if (!(adam_eps > 0.0)) throw ConfigError("agent.adam_eps: must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("agent.clip_norm: must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("agent.gamma: must lie in [0, 1]");
  if (!(scheduler_gamma >= 0.0 && scheduler_gamma <= 1.0)) throw ConfigError("agent.scheduler_gamma: must lie in [0, 1]");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("agent.dropout: must lie in [0, 1)");
  if (!(noisy_sigma0 >= 0.0)) throw ConfigError("agent.noisy_sigma0: must be non-negative");
  if (!(priority_alpha >= 0.0)) throw ConfigError("agent.priority_alpha: must be non-negative");
  if (!(beta_start >= 0.0 && beta_start <= 1.0)) throw ConfigError("agent.beta_start: must lie in [0, 1]");
  if (!(boltzmann_beta >= 0.0)) throw ConfigError("agent.boltzmann_beta: must be non-negative");
  if (boltzmann_sign != 1.0 && boltzmann_sign != -1.0) throw ConfigError("agent.boltzmann_sign: must be +1 or -1");
  if (!(reward_scale > 0.0)) throw ConfigError("agent.reward_scale: must be positive");
}

namespace {

rl::RainbowConfig rainbow_config(const AgentConfig& cfg, const ObsShape& shape, std::size_t n_actions,
                                 std::size_t atoms, const std::vector<std::size_t>& conv, std::size_t hidden,
                                 double gamma, double vmax) {
  rl::RainbowConfig rc;
  rc.net.in_channels = shape.channels;
  rc.net.height = shape.height;
  rc.net.width = shape.width;
  rc.net.conv_channels = conv;
  rc.net.hidden = hidden;
  rc.net.stream_hidden = cfg.stream_hidden;
  rc.net.n_actions = n_actions;
  rc.net.n_atoms = atoms;
  rc.net.noisy_sigma0 = cfg.noisy_sigma0;
  rc.net.dropout = cfg.dropout;
  rc.vmin = 0.0;
  rc.vmax = vmax;
  rc.gamma = gamma;
  rc.n_step = cfg.n_step;
  rc.replay_capacity = cfg.replay_capacity;
  rc.batch_size = cfg.batch_size;
  rc.learn_start = cfg.learn_start;
  rc.adam.lr = cfg.lr;
  rc.adam.eps = cfg.adam_eps;
  rc.adam.clip_norm = cfg.clip_norm;
  rc.priority_alpha = cfg.priority_alpha;
  rc.beta_start = cfg.beta_start;
  rc.beta_anneal_steps = cfg.beta_anneal_steps;
  rc.target_sync = cfg.target_sync;
  return rc;
}

// Per-slot reward bound: every user gains at most the V-PSNR cap.
double default_vmax(const SimConfig& sim, const AgentConfig& cfg) {
  return static_cast<double>(sim.deployment.n_users) * vpsnr_cap() * cfg.reward_scale;
}

ObservationSpec observation_spec(const SimConfig& sim, const AgentConfig& cfg) {
  return {sim.engine.grid_cell, sim.engine.observation_window, cfg.requester_map};
}

void save_agent(const rl::RainbowAgent& a, const fs::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + file.string());
  rl::write_params(os, a.params());
  rl::write_params(os, a.target_params());
  if (!os) throw std::runtime_error("failed writing checkpoint " + file.string());
}

void load_agent(rl::RainbowAgent& a, const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read checkpoint " + file.string());
  a.set_params(rl::read_params(is));
  a.set_target_params(rl::read_params(is));
}

std::vector<double> scaled_local_rewards(const EpisodeState& s, const SlotResult& r, double window, double scale) {
  std::vector<double> out(s.n_aps());
  for (std::size_t b = 0; b < s.n_aps(); ++b) out[b] = local_reward(s, b, r.user_gain, window) * scale;
  return out;
}

}  // namespace

// ---------------------------------------------------------------- distributed

DistributedAssociation::DistributedAssociation(const SimConfig& sim, const AgentConfig& cfg, bool federated,
                                               std::uint64_t seed)
    : sim_(sim), cfg_(cfg), obs_spec_(observation_spec(sim, cfg)), federated_(federated), seed_(seed) {
  cfg_.validate();
  const std::size_t B = sim.deployment.ap_grid.rows * sim.deployment.ap_grid.cols;
  const double vmax = cfg.vmax > 0.0 ? cfg.vmax : default_vmax(sim, cfg);
  const auto rc = rainbow_config(cfg, local_shape(sim, obs_spec_), sim.deployment.n_uavs, cfg.atoms,
                                 cfg.conv_channels, cfg.hidden, cfg.gamma, vmax);
  for (std::size_t b = 0; b < B; ++b) {
    agents_.push_back(std::make_unique<rl::RainbowAgent>(rc, derive_seed(seed, {0xa9, b})));
    nstep_.emplace_back(cfg.n_step, cfg.gamma);
    policy_rng_.push_back(make_rng(seed, {0xb0, b}));
  }
  // Homogeneous agents start from one parameter set when averaging is on.
  if (federated_) federated_average();
  fedavg_calls_ = 0;
}

void DistributedAssociation::begin_episode(const EpisodeState& state, std::uint64_t seed) {
  if (state.n_aps() != agents_.size()) throw StructuralError("distributed association: AP count differs from the agents");
  for (std::size_t b = 0; b < agents_.size(); ++b) {
    policy_rng_[b] = make_rng(seed, {0xb0, b});
    nstep_[b].clear();
  }
  has_pending_ = false;
  episode_seed_ = seed;
}

std::size_t DistributedAssociation::choose(std::size_t ap, const std::vector<double>& q) {
  if (!training_ && cfg_.greedy_eval) return rl::greedy_action(q);
  return rl::boltzmann_sample(q, cfg_.boltzmann_beta, policy_rng_.at(ap), cfg_.boltzmann_sign);
}

VirtualCellMap DistributedAssociation::decide(const EpisodeState& state) {
  const std::size_t B = agents_.size();
  std::vector<std::vector<double>> obs(B);
  for (std::size_t b = 0; b < B; ++b) obs[b] = build_local_observation(state, b, obs_spec_);
  if (training_ && has_pending_) flush_pending(&obs, false);

  std::vector<std::size_t> choice(B);
  for (std::size_t b = 0; b < B; ++b) {
    const auto q = agents_[b]->q_values(obs[b], training_);
    choice[b] = choose(b, q);
    if (export_) {
      const auto h = agents_[b]->hidden(obs[b]);
      export_({episode_seed_, state.global_slot, b, obs[b], std::vector<double>(h.data(), h.data() + h.size()),
               choice[b]});
    }
  }
  if (training_) {
    pending_.resize(B);
    for (std::size_t b = 0; b < B; ++b) {
      pending_[b].obs = std::move(obs[b]);
      pending_[b].action = static_cast<std::uint32_t>(choice[b]);
      pending_[b].reward = 0.0;
    }
    has_pending_ = true;
  }
  return form_virtual_cells(choice, state.n_uavs());
}

void DistributedAssociation::observe(const EpisodeState& after, const SlotResult& result, bool episode_done) {
  if (!training_ || !has_pending_) return;
  const auto r = scaled_local_rewards(after, result, obs_spec_.window, cfg_.reward_scale);
  for (std::size_t b = 0; b < agents_.size(); ++b) pending_[b].reward = r[b];
  if (episode_done) flush_pending(nullptr, true);
  ++steps_;
  if (sim_.time.train_interval > 0 && steps_ % sim_.time.train_interval == 0) train();
  if (federated_ && sim_.time.fed_interval > 0 && steps_ % sim_.time.fed_interval == 0) federated_average();
}

void DistributedAssociation::flush_pending(const std::vector<std::vector<double>>* next_obs, bool done) {
  for (std::size_t b = 0; b < agents_.size(); ++b) {
    auto& p = pending_[b];
    const std::vector<double>& next = next_obs ? (*next_obs)[b] : p.obs;
    for (auto& t : nstep_[b].push(p.obs, {p.action}, p.reward, next, done)) agents_[b]->store(std::move(t));
  }
  has_pending_ = false;
}

void DistributedAssociation::train() {
  for (auto& a : agents_) a->train_step();
}

void DistributedAssociation::federated_average() {
  std::vector<const rl::AgentParams*> online, target;
  for (const auto& a : agents_) {
    online.push_back(&a->params());
    target.push_back(&a->target_params());
  }
  const auto mean_online = rl::fedavg(std::span<const rl::AgentParams* const>(online));
  const auto mean_target = rl::fedavg(std::span<const rl::AgentParams* const>(target));
  for (auto& a : agents_) {
    a->set_params(mean_online);
    a->set_target_params(mean_target);
  }
  ++fedavg_calls_;
}

std::unique_ptr<AssociationPolicy> DistributedAssociation::clone() const {
  auto c = std::make_unique<DistributedAssociation>(sim_, cfg_, federated_, seed_);
  for (std::size_t b = 0; b < agents_.size(); ++b) {
    c->agents_[b]->set_params(agents_[b]->params());
    c->agents_[b]->set_target_params(agents_[b]->target_params());
  }
  c->fedavg_calls_ = fedavg_calls_;
  c->set_training(training_);
  return c;
}

void DistributedAssociation::save(const fs::path& dir) const {
  fs::create_directories(dir);
  for (std::size_t b = 0; b < agents_.size(); ++b) save_agent(*agents_[b], dir / ("ap" + std::to_string(b) + ".cfmbp"));
}

void DistributedAssociation::load(const fs::path& dir) {
  for (std::size_t b = 0; b < agents_.size(); ++b) load_agent(*agents_[b], dir / ("ap" + std::to_string(b) + ".cfmbp"));
}

// ---------------------------------------------------------------- centralized

CentralizedAssociation::CentralizedAssociation(const SimConfig& sim, const AgentConfig& cfg, std::uint64_t seed)
    : sim_(sim),
      cfg_(cfg),
      obs_spec_(observation_spec(sim, cfg)),
      seed_(seed),
      actions_(0),
      nstep_(cfg.n_step, cfg.gamma) {
  cfg_.validate();
  const std::size_t B = sim.deployment.ap_grid.rows * sim.deployment.ap_grid.cols;
  const std::size_t U = sim.deployment.n_uavs;
  std::size_t count = 0;
  try {
    count = static_cast<std::size_t>(joint_action_count(B, U));
  } catch (const std::overflow_error&) {
    count = std::numeric_limits<std::size_t>::max();
  }
  if (count > cfg.action_cap)
    throw ConfigError("agent.action_cap: centralized action space " + std::to_string(U) + "^" + std::to_string(B) +
                      " exceeds the cap of " + std::to_string(cfg.action_cap));
  actions_ = count;
  const double vmax = cfg.vmax > 0.0 ? cfg.vmax : default_vmax(sim, cfg);
  const auto rc = rainbow_config(cfg, global_shape(sim, obs_spec_), actions_, cfg.atoms, cfg.conv_channels,
                                 cfg.hidden, cfg.gamma, vmax);
  agent_ = std::make_unique<rl::RainbowAgent>(rc, derive_seed(seed, {0xce}));
}

void CentralizedAssociation::begin_episode(const EpisodeState&, std::uint64_t) {
  nstep_.clear();
  has_pending_ = false;
}

VirtualCellMap CentralizedAssociation::decide(const EpisodeState& state) {
  auto obs = build_global_observation(state, obs_spec_);
  if (training_ && has_pending_) {
    for (auto& t : nstep_.push(pending_obs_, {pending_action_}, pending_reward_, obs, false)) agent_->store(std::move(t));
    has_pending_ = false;
  }
  const auto q = agent_->q_values(obs, training_);
  const std::size_t a = rl::greedy_action(q);
  if (training_) {
    pending_obs_ = std::move(obs);
    pending_action_ = static_cast<std::uint32_t>(a);
    pending_reward_ = 0.0;
    has_pending_ = true;
  }
  return form_virtual_cells(decode_joint_action(a, state.n_aps(), state.n_uavs()), state.n_uavs());
}

void CentralizedAssociation::observe(const EpisodeState&, const SlotResult& result, bool episode_done) {
  if (!training_ || !has_pending_) return;
  pending_reward_ = result.reward * cfg_.reward_scale;
  if (episode_done) {
    for (auto& t : nstep_.push(pending_obs_, {pending_action_}, pending_reward_, pending_obs_, true))
      agent_->store(std::move(t));
    has_pending_ = false;
  }
  ++steps_;
  if (sim_.time.train_interval > 0 && steps_ % sim_.time.train_interval == 0) agent_->train_step();
}

std::unique_ptr<AssociationPolicy> CentralizedAssociation::clone() const {
  auto c = std::make_unique<CentralizedAssociation>(sim_, cfg_, seed_);
  c->agent_->set_params(agent_->params());
  c->agent_->set_target_params(agent_->target_params());
  c->set_training(training_);
  return c;
}

void CentralizedAssociation::save(const fs::path& dir) const {
  fs::create_directories(dir);
  save_agent(*agent_, dir / "centralized.cfmbp");
}

void CentralizedAssociation::load(const fs::path& dir) { load_agent(*agent_, dir / "centralized.cfmbp"); }

// ---------------------------------------------------------------- scheduler

LearnedScheduler::LearnedScheduler(const SimConfig& sim, const AgentConfig& cfg, std::uint64_t seed)
    : sim_(sim), cfg_(cfg), obs_spec_(observation_spec(sim, cfg)), seed_(seed) {
  cfg_.validate();
  const double k = static_cast<double>(sim.time.slots_per_reschedule);
  const double vmax = cfg.scheduler_vmax > 0.0 ? cfg.scheduler_vmax : k * default_vmax(sim, cfg);
  const auto rc = rainbow_config(cfg, scheduler_shape(sim), sim.deployment.n_uavs * kTilesPerUav,
                                 cfg.scheduler_atoms, cfg.scheduler_conv, cfg.scheduler_hidden, cfg.scheduler_gamma,
                                 vmax);
  agent_ = std::make_unique<rl::RainbowAgent>(rc, derive_seed(seed, {0x5c}));
}

void LearnedScheduler::begin_episode(const EpisodeState&, std::uint64_t) { has_pending_ = false; }

Schedule LearnedScheduler::decide(const EpisodeState& state) {
  if (!state.at_reschedule_boundary()) throw StateError("learned scheduler: called off a re-scheduling boundary");
  auto obs = build_scheduler_observation(state, obs_spec_);
  if (training_ && has_pending_) {
    agent_->store({pending_obs_, pending_actions_, pending_reward_, obs, cfg_.scheduler_gamma, false});
    has_pending_ = false;
  }
  const auto q = agent_->q_values(obs, training_);
  const std::size_t U = state.n_uavs();
  std::vector<std::vector<double>> prio(U, std::vector<double>(kTilesPerUav, 0.0));
  std::vector<std::vector<double>> popularity(U, std::vector<double>(kTilesPerUav, 0.0));
  for (std::size_t u = 0; u < U; ++u)
    for (std::size_t i = 0; i < kTilesPerUav; ++i) {
      const TileId t{u, i / kTileCols, i % kTileCols};
      // Tiles nobody can decode carry no priority, whatever the head says.
      if (pending_requesters(t, state.decode) > 0) prio[u][i] = std::max(q[u * kTilesPerUav + i], 0.0) + 1e-12;
      popularity[u][i] = static_cast<double>(state.requests->requesters(t).size());
    }
  Schedule s = select_top_tiles(prio, state.config->time.slots_per_reschedule, &popularity);
  if (training_) {
    pending_obs_ = std::move(obs);
    pending_actions_.clear();
    for (std::size_t u = 0; u < U; ++u)
      for (const auto& t : s.tiles[u]) pending_actions_.push_back(static_cast<std::uint32_t>(t.global_index()));
    pending_reward_ = 0.0;
    has_pending_ = true;
  }
  return s;
}

void LearnedScheduler::option_end(const EpisodeState&, double option_reward, bool episode_done) {
  if (!training_ || !has_pending_) return;
  pending_reward_ = option_reward * cfg_.reward_scale;
  if (episode_done) {
    agent_->store({pending_obs_, pending_actions_, pending_reward_, pending_obs_, 0.0, true});
    has_pending_ = false;
  }
  ++options_;
  for (std::size_t i = 0; i < cfg_.scheduler_train_steps; ++i) agent_->train_step();
}

std::unique_ptr<SchedulerPolicy> LearnedScheduler::clone() const {
  auto c = std::make_unique<LearnedScheduler>(sim_, cfg_, seed_);
  c->agent_->set_params(agent_->params());
  c->agent_->set_target_params(agent_->target_params());
  c->set_training(training_);
  return c;
}

void LearnedScheduler::save(const fs::path& dir) const {
  fs::create_directories(dir);
  save_agent(*agent_, dir / "scheduler.cfmbp");
}

void LearnedScheduler::load(const fs::path& dir) { load_agent(*agent_, dir / "scheduler.cfmbp"); }

// ---------------------------------------------------------------- bundles

const std::vector<std::string>& agent_names() {
  static const std::vector<std::string> names{"centralized", "distributed", "distributed_nofl", "hierarchical",
                                              "hierarchical_nofl"};
  return names;
}

PolicyBundle make_agent_bundle(const std::string& name, const SimConfig& sim, const AgentConfig& cfg,
                               std::uint64_t seed) {
  const bool fl = name.find("nofl") == std::string::npos;
  const std::uint64_t assoc_seed = derive_seed(seed, {0xa5});
  PolicyBundle b;
  if (name == "centralized") {
    b.scheduler = std::make_unique<PpfScheduler>();
    b.associator = std::make_unique<CentralizedAssociation>(sim, cfg, assoc_seed);
  } else if (name == "distributed" || name == "distributed_nofl") {
    b.scheduler = std::make_unique<PpfScheduler>();
    b.associator = std::make_unique<DistributedAssociation>(sim, cfg, fl, assoc_seed);
  } else if (name == "hierarchical" || name == "hierarchical_nofl") {
    b.scheduler = std::make_unique<LearnedScheduler>(sim, cfg, derive_seed(seed, {0x5d}));
    b.associator = std::make_unique<DistributedAssociation>(sim, cfg, fl, assoc_seed);
  } else {
    std::string opts;
    for (const auto& n : agent_names()) opts += (opts.empty() ? "" : ", ") + n;
    throw ConfigError("unknown agent '" + name + "' (options: " + opts + ")");
  }
  return b;
}

void save_bundle(const PolicyBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  if (auto* c = dynamic_cast<const Checkpointable*>(bundle.scheduler.get())) c->save(dir);
  if (auto* c = dynamic_cast<const Checkpointable*>(bundle.associator.get())) c->save(dir);
}

void load_bundle(PolicyBundle& bundle, const fs::path& dir) {
  if (auto* c = dynamic_cast<Checkpointable*>(bundle.scheduler.get())) c->load(dir);
  if (auto* c = dynamic_cast<Checkpointable*>(bundle.associator.get())) c->load(dir);
}

}  // namespace cfmb::agents
