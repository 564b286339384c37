#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cfmb/engine.hpp"

namespace cfmb::agents {

/// What the per-UAV requester map counts for each user.
enum class RequesterMode {
  Schedule,  // pending requests among all tiles scheduled in the current option
  Current,   // 1 when the UAV's tile of the current broadcast slot is pending for the user
};

struct ObservationSpec {
  double cell = 10.0;
  double window = kObservationWindow;
  RequesterMode mode = RequesterMode::Schedule;
};

/// Square grid of `side` x `side` cells of size `cell` anchored at (x0, y0).
struct GridFrame {
  double x0 = 0.0;
  double y0 = 0.0;
  double cell = 10.0;
  std::size_t side = 8;

  // (row, col) of the cell containing p, or nothing when p is outside.
  std::optional<std::pair<std::size_t, std::size_t>> locate(const Position& p, bool clamp_edges = false) const;
};

GridFrame global_frame(const EpisodeState& s, const ObservationSpec& spec);
GridFrame local_frame(const EpisodeState& s, std::size_t ap, const ObservationSpec& spec);

/// Divides every entry by the maximum (all-zero input stays zero).
void normalize_by_max(std::span<double> values);

/// Per-user request count that feeds the requester maps.
std::vector<double> user_request_weights(const EpisodeState& s, RequesterMode mode);

/// 3 maps per UAV (UAV position, AP positions, requester density), channel-major.
std::vector<double> build_global_observation(const EpisodeState& s, const ObservationSpec& spec);
std::vector<double> build_local_observation(const EpisodeState& s, std::size_t ap, const ObservationSpec& spec);

/// Per-AP 6x12x2 popularity of the users inside each AP window, tiled so AP
/// (r, c) of the grid occupies rows r*6.. and columns c*12..; 2 channels per UAV.
std::vector<double> build_scheduler_observation(const EpisodeState& s, const ObservationSpec& spec);

struct ObsShape {
  std::size_t channels;
  std::size_t height;
  std::size_t width;
};
ObsShape global_shape(const SimConfig& cfg, const ObservationSpec& spec);
ObsShape local_shape(const SimConfig& cfg, const ObservationSpec& spec);
ObsShape scheduler_shape(const SimConfig& cfg);

/// Sum of V-PSNR gains of the users inside AP `ap`'s window.
double local_reward(const EpisodeState& s, std::size_t ap, std::span<const double> user_gain, double window);

}  // namespace cfmb::agents
