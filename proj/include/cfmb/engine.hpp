#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cfmb/association.hpp"
#include "cfmb/channel.hpp"
#include "cfmb/deployment.hpp"
#include "cfmb/phy.hpp"
#include "cfmb/scheduling.hpp"
#include "cfmb/video.hpp"

namespace cfmb {

struct TimeConfig {
  std::size_t frames_per_gop = 5;
  std::size_t reschedules_per_frame = 28;
  std::size_t slots_per_reschedule = 10;
  // Broadcast slot length in seconds; <= 0 selects the calibrated default.
  double slot_seconds = 0.0;
  // SINR (dB) at which an I tile exactly fits one slot in the calibrated default.
  double calibration_sinr_db = 5.0;
  std::size_t fed_interval = 10;
  std::size_t train_interval = 10;

  void validate() const;
  std::size_t slots_per_gop() const { return frames_per_gop * reschedules_per_frame * slots_per_reschedule; }
};

/// Slot length at which an I-frame tile exactly fits at the calibration SINR.
double calibrated_slot_seconds(const PayloadModel& video, const ChannelParams& ch, double sinr_db);

struct EngineOptions {
  bool force_success = false;
  bool coherent_mrc = false;
  double grid_cell = 10.0;
  double observation_window = kObservationWindow;

  void validate() const;
};

/// Everything the simulator needs for one GOP.
struct SimConfig {
  DeploymentSpec deployment;
  ChannelParams channel;
  PayloadModel video;
  PitchBand pitch;
  TimeConfig time;
  EngineOptions engine;

  void validate() const;
  double slot_seconds() const;
};

/// Mutable state of one GOP episode.
struct EpisodeState {
  const SimConfig* config = nullptr;
  std::uint64_t seed = 0;
  Deployment deployment;
  LargeScaleGains large_scale;
  std::vector<Viewpoint> viewpoints;
  std::shared_ptr<const RequestSet> requests;
  DecodeState decode;
  PpfHistory history;
  Rng channel_rng;
  Schedule schedule;

  std::size_t frame = 0;
  std::size_t reschedule = 0;       // within the frame
  std::size_t slot = 0;             // within the re-scheduling slot
  std::size_t global_slot = 0;      // within the GOP
  std::size_t scheduler_calls = 0;
  bool done = false;

  std::vector<double> user_vpsnr;   // current frame
  std::vector<double> frame_mean_vpsnr;

  bool at_reschedule_boundary() const { return slot == 0; }
  std::size_t n_aps() const { return deployment.n_aps(); }
  std::size_t n_uavs() const { return deployment.n_uavs(); }
  std::size_t n_users() const { return deployment.n_users(); }
  // Tile each UAV transmits in the current broadcast slot.
  std::vector<TileId> current_tiles() const;
};

EpisodeState make_episode(const SimConfig& cfg, std::uint64_t seed);

struct SlotResult {
  double reward = 0.0;
  std::vector<double> user_gain;  // V-PSNR change per user
  VirtualCellMap cells;
  std::vector<TileId> tiles;      // per UAV, tile of this slot
  std::size_t new_decodes = 0;
};

/// One broadcast slot under a fixed association: channels, uplink/downlink
/// capacity, DF success, decode update and reward. Does not move the clock.
SlotResult run_broadcast_slot(EpisodeState& state, const VirtualCellMap& cells);

class SchedulerPolicy {
 public:
  virtual ~SchedulerPolicy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const EpisodeState&, std::uint64_t /*seed*/) {}
  // Called only at a re-scheduling boundary.
  virtual Schedule decide(const EpisodeState& state) = 0;
  // Called after the option's last broadcast slot with its summed reward.
  virtual void option_end(const EpisodeState& /*after*/, double /*option_reward*/, bool /*episode_done*/) {}
  virtual std::unique_ptr<SchedulerPolicy> clone() const = 0;
  virtual void set_training(bool on) { training_ = on; }
  bool training() const { return training_; }

 protected:
  bool training_ = false;
};

class AssociationPolicy {
 public:
  virtual ~AssociationPolicy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const EpisodeState&, std::uint64_t /*seed*/) {}
  virtual VirtualCellMap decide(const EpisodeState& state) = 0;
  virtual void observe(const EpisodeState& /*after*/, const SlotResult& /*result*/, bool /*episode_done*/) {}
  virtual std::unique_ptr<AssociationPolicy> clone() const = 0;
  virtual void set_training(bool on) { training_ = on; }
  bool training() const { return training_; }

 protected:
  bool training_ = false;
};

struct TraceRecord {
  std::size_t global_slot = 0;
  std::size_t frame = 0;
  std::size_t reschedule = 0;
  std::size_t slot = 0;
  bool scheduler_acted = false;
  std::vector<std::size_t> choice;
  std::vector<TileId> tiles;
  double reward = 0.0;
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// Scheduler once, then slots_per_reschedule broadcast slots with a fresh
/// association each. Returns the per-slot rewards.
std::vector<double> run_reschedule_slot(EpisodeState& state, SchedulerPolicy& scheduler,
                                        AssociationPolicy& associator, const TraceSink* trace = nullptr);

struct EpisodeResult {
  double score = 0.0;                    // normalized, [0, frames]
  std::vector<double> frame_vpsnr;       // user-mean per frame
  std::vector<double> rewards;           // per broadcast slot
  std::vector<std::size_t> final_decoded;
  std::size_t scheduler_calls = 0;
};

EpisodeResult run_gop_episode(const SimConfig& cfg, SchedulerPolicy& scheduler, AssociationPolicy& associator,
                              std::uint64_t seed, const TraceSink* trace = nullptr);

/// Normalized score recomputed from per-frame means.
double score_from_frames(const std::vector<double>& frame_vpsnr);

struct PolicyBundle {
  std::unique_ptr<SchedulerPolicy> scheduler;
  std::unique_ptr<AssociationPolicy> associator;

  PolicyBundle clone() const { return {scheduler->clone(), associator->clone()}; }
  std::string name() const { return scheduler->name() + "+" + associator->name(); }
};

struct EvalSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> scores;
  std::vector<EpisodeResult> episodes;
};

/// Seed of evaluation episode i under base seed `base`.
std::uint64_t episode_seed(std::uint64_t base, std::size_t i);

/// Independent episodes (seeds derived from `base_seed`) spread over
/// `workers` threads; results are ordered by episode index.
EvalSummary evaluate(const SimConfig& cfg, const PolicyBundle& policy, std::size_t n_episodes,
                     std::uint64_t base_seed, std::size_t workers = 1, bool keep_episodes = false);

/// Worker count from CFMB_WORKERS (default 1).
std::size_t default_workers();

/// Sample mean and standard deviation (n-1 denominator; 0 when n == 1).
void mean_sd(const std::vector<double>& x, double& mean, double& sd);

}  // namespace cfmb
