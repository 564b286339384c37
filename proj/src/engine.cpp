#include "cfmb/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "cfmb/errors.hpp"

namespace cfmb {

void TimeConfig::validate() const {
  if (frames_per_gop < 1) throw ConfigError("time.frames_per_gop: must be at least 1");
  if (reschedules_per_frame < 1) throw ConfigError("time.reschedules_per_frame: must be at least 1");
  if (slots_per_reschedule < 1) throw ConfigError("time.slots_per_reschedule: must be at least 1");
  if (slots_per_reschedule > kTilesPerUav) throw ConfigError("time.slots_per_reschedule: must not exceed 72");
  if (!std::isfinite(slot_seconds)) throw ConfigError("time.slot_seconds: must be finite");
  if (fed_interval < 1) throw ConfigError("time.fed_interval: must be at least 1");
  if (train_interval < 1) throw ConfigError("time.train_interval: must be at least 1");
}

double calibrated_slot_seconds(const PayloadModel& video, const ChannelParams& ch, double sinr_db) {
  const double bits = tile_payload_bits(FrameKind::I, video);
  const double rate = std::min(ch.b_ul, ch.b_dl) * std::log2(1.0 + db_to_linear(sinr_db));
  return bits / rate;
}

void EngineOptions::validate() const {
  if (!(grid_cell > 0.0)) throw ConfigError("engine.grid_cell: must be positive");
  if (!(observation_window > 0.0)) throw ConfigError("engine.observation_window: must be positive");
}

void SimConfig::validate() const {
  channel.validate();
  video.validate();
  time.validate();
  engine.validate();
  if (deployment.n_uavs < 1) throw ConfigError("deployment.n_uavs: must be at least 1");
  if (deployment.ap_grid.rows < 1 || deployment.ap_grid.cols < 1) throw ConfigError("deployment.ap_grid: must be at least 1x1");
  if (!(deployment.area_side > 0.0)) throw ConfigError("deployment.area_side: must be positive");
  if (deployment.cluster_radius < 0.0) throw ConfigError("deployment.cluster_radius: must be non-negative");
  if (!(pitch.max_deg >= pitch.min_deg)) throw ConfigError("video.pitch_band: max below min");
}

double SimConfig::slot_seconds() const {
  return time.slot_seconds > 0.0 ? time.slot_seconds
                                 : calibrated_slot_seconds(video, channel, time.calibration_sinr_db);
}

std::vector<TileId> EpisodeState::current_tiles() const {
  std::vector<TileId> t;
  t.reserve(schedule.tiles.size());
  for (const auto& per_uav : schedule.tiles) t.push_back(per_uav.at(slot));
  return t;
}

EpisodeState make_episode(const SimConfig& cfg, std::uint64_t seed) {
  EpisodeState s;
  s.config = &cfg;
  s.seed = seed;
  Rng dep_rng = make_rng(seed, {10});
  s.deployment = make_deployment(cfg.deployment, dep_rng);
  s.large_scale = large_scale_gains(s.deployment, cfg.channel);
  Rng vp_rng = make_rng(seed, {11});
  std::vector<std::size_t> user_uav;
  for (const auto& u : s.deployment.users) {
    s.viewpoints.push_back(generate_viewpoint(vp_rng, cfg.pitch));
    user_uav.push_back(u.cluster);
  }
  s.requests = std::make_shared<const RequestSet>(make_requests(s.viewpoints, user_uav, s.deployment.n_uavs()));
  s.decode = DecodeState(s.requests);
  s.history = PpfHistory(s.deployment.n_uavs());
  s.channel_rng = make_rng(seed, {12});
  s.user_vpsnr.assign(s.deployment.n_users(), 0.0);
  return s;
}

SlotResult run_broadcast_slot(EpisodeState& state, const VirtualCellMap& cells) {
  const SimConfig& cfg = *state.config;
  if (cells.n_aps() != state.n_aps() || cells.n_uavs() != state.n_uavs())
    throw StructuralError("run_broadcast_slot: association does not match the deployment");
  SlotResult r;
  r.cells = cells;
  r.tiles = state.current_tiles();
  r.user_gain.assign(state.n_users(), 0.0);

  const ChannelRealization ch = realize_channels(state.large_scale, state.channel_rng);
  const auto active = cells.active_uavs();
  const double tb = cfg.slot_seconds();
  const double payload = tile_payload_bits(frame_kind(state.frame), cfg.video);
  PhyOptions opt;
  opt.coherent_mrc = cfg.engine.coherent_mrc;

  std::vector<ApGroup> serving;
  for (auto u : active) serving.push_back(cells.groups[u]);

  for (std::size_t i = 0; i < active.size(); ++i) {
    const std::size_t u = active[i];
    const TileId& tile = r.tiles[u];
    const double up = slot_capacity(uplink_sinr(u, cells.groups[u], active, ch, cfg.channel, opt), cfg.channel.b_ul, tb);
    for (auto v : state.requests->requesters(tile)) {
      if (state.decode.decoded(v, tile)) continue;
      bool ok = cfg.engine.force_success;
      if (!ok) {
        const double down = slot_capacity(downlink_sinr(cells.groups[u], v, serving, ch, cfg.channel),
                                          cfg.channel.b_dl, tb);
        ok = tile_success(up, down, payload);
      }
      if (update_decode_state(state.decode, v, tile, ok, state.frame)) {
        ++r.new_decodes;
        const double before = state.user_vpsnr[v];
        state.user_vpsnr[v] = vpsnr(state.decode.requested_count(v), state.decode.decoded_count(v));
        r.user_gain[v] = state.user_vpsnr[v] - before;
        r.reward += r.user_gain[v];
      }
    }
  }
  return r;
}

namespace {

// Moves the clock one broadcast slot forward, closing frames as needed.
void advance_clock(EpisodeState& s) {
  const TimeConfig& t = s.config->time;
  ++s.global_slot;
  if (++s.slot < t.slots_per_reschedule) return;
  s.slot = 0;
  s.history.record_slot(s.decode);
  if (++s.reschedule < t.reschedules_per_frame) return;
  s.reschedule = 0;
  double mean = 0.0;
  for (double v : s.user_vpsnr) mean += v;
  s.frame_mean_vpsnr.push_back(s.user_vpsnr.empty() ? 0.0 : mean / static_cast<double>(s.user_vpsnr.size()));
  if (++s.frame >= t.frames_per_gop) {
    s.done = true;
    return;
  }
  s.decode.advance_frame();
  std::fill(s.user_vpsnr.begin(), s.user_vpsnr.end(), 0.0);
}

}  // namespace

std::vector<double> run_reschedule_slot(EpisodeState& state, SchedulerPolicy& scheduler,
                                        AssociationPolicy& associator, const TraceSink* trace) {
  if (!state.at_reschedule_boundary()) throw StateError("run_reschedule_slot: not at a re-scheduling boundary");
  if (state.done) throw StateError("run_reschedule_slot: episode already finished");
  const std::size_t k = state.config->time.slots_per_reschedule;
  state.schedule = scheduler.decide(state);
  state.schedule.reschedule_index = state.frame * state.config->time.reschedules_per_frame + state.reschedule;
  ++state.scheduler_calls;
  if (state.schedule.n_uavs() != state.n_uavs()) throw StructuralError("scheduler returned a schedule for the wrong UAV count");
  for (const auto& t : state.schedule.tiles)
    if (t.size() != k) throw StructuralError("scheduler returned a schedule of the wrong length");

  std::vector<double> rewards;
  rewards.reserve(k);
  double option_reward = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const VirtualCellMap cells = associator.decide(state);
    TraceRecord rec;
    if (trace) {
      rec.global_slot = state.global_slot;
      rec.frame = state.frame;
      rec.reschedule = state.reschedule;
      rec.slot = state.slot;
      rec.scheduler_acted = (i == 0);
      rec.choice = cells.choice;
    }
    SlotResult res = run_broadcast_slot(state, cells);
    advance_clock(state);
    associator.observe(state, res, state.done);
    rewards.push_back(res.reward);
    option_reward += res.reward;
    if (trace) {
      rec.tiles = res.tiles;
      rec.reward = res.reward;
      (*trace)(rec);
    }
  }
  scheduler.option_end(state, option_reward, state.done);
  return rewards;
}

double score_from_frames(const std::vector<double>& frame_vpsnr) {
  return normalized_gop_score(frame_vpsnr, frame_vpsnr.size());
}

EpisodeResult run_gop_episode(const SimConfig& cfg, SchedulerPolicy& scheduler, AssociationPolicy& associator,
                              std::uint64_t seed, const TraceSink* trace) {
  EpisodeState state = make_episode(cfg, seed);
  const std::uint64_t policy_seed = derive_seed(seed, {13});
  scheduler.begin_episode(state, policy_seed);
  associator.begin_episode(state, policy_seed);
  EpisodeResult res;
  res.rewards.reserve(cfg.time.slots_per_gop());
  while (!state.done) {
    auto r = run_reschedule_slot(state, scheduler, associator, trace);
    res.rewards.insert(res.rewards.end(), r.begin(), r.end());
  }
  res.frame_vpsnr = state.frame_mean_vpsnr;
  res.score = score_from_frames(res.frame_vpsnr);
  res.scheduler_calls = state.scheduler_calls;
  for (std::size_t v = 0; v < state.n_users(); ++v) res.final_decoded.push_back(state.decode.decoded_count(v));
  return res;
}

std::uint64_t episode_seed(std::uint64_t base, std::size_t i) { return derive_seed(base, {0xe7a1, i}); }

void mean_sd(const std::vector<double>& x, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (x.empty()) return;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  if (x.size() < 2) return;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::size_t default_workers() {
  if (const char* env = std::getenv("CFMB_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  return 1;
}

EvalSummary evaluate(const SimConfig& cfg, const PolicyBundle& policy, std::size_t n_episodes, std::uint64_t base_seed,
                     std::size_t workers, bool keep_episodes) {
  if (n_episodes == 0) throw std::invalid_argument("evaluate: need at least one episode");
  workers = std::max<std::size_t>(1, std::min(workers, n_episodes));
  std::vector<EpisodeResult> results(n_episodes);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    PolicyBundle local = policy.clone();
    local.scheduler->set_training(false);
    local.associator->set_training(false);
    for (std::size_t i = next++; i < n_episodes; i = next++)
      results[i] = run_gop_episode(cfg, *local.scheduler, *local.associator, episode_seed(base_seed, i));
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  EvalSummary s;
  for (const auto& r : results) s.scores.push_back(r.score);
  mean_sd(s.scores, s.mean, s.sd);
  if (keep_episodes) s.episodes = std::move(results);
  return s;
}

}  // namespace cfmb
