#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cfmb/deployment.hpp"
#include "cfmb/phy.hpp"
#include "cfmb/video.hpp"

namespace cfmb {

/// Per-AP UAV choice and the AP groups it induces.
struct VirtualCellMap {
  std::vector<std::size_t> choice;  // choice[b] = UAV served by AP b
  std::vector<ApGroup> groups;      // groups[u] = APs serving UAV u, ascending

  std::size_t n_aps() const { return choice.size(); }
  std::size_t n_uavs() const { return groups.size(); }
  // UAVs with at least one serving AP, ascending.
  std::vector<std::size_t> active_uavs() const;
};

VirtualCellMap form_virtual_cells(std::span<const std::size_t> per_ap_choices, std::size_t n_uavs);

/// Side of the square observation window around an AP, meters.
inline constexpr double kObservationWindow = 60.0;

/// True when `p` lies in the half-open square window of side `side` centered on `center`.
bool in_window(const Position& center, const Position& p, double side = kObservationWindow);

/// Centralized-baseline choice of one AP: the UAV whose current tile has the
/// most pending requesters inside the AP's window (ties and empty window: lowest index).
std::size_t cb_decide(std::size_t ap, const Deployment& d, const DecodeState& state,
                      std::span<const TileId> current_tiles, double window_side = kObservationWindow);

/// Argmax of per-UAV counts with the lowest-index tie rule.
std::size_t cb_pick(std::span<const std::size_t> counts_per_uav);

/// Cell-free baseline: every AP serves the UAV with the highest priority.
VirtualCellMap cf_decide(std::span<const double> priority_per_uav, std::size_t n_aps);

/// Mixed-radix code of per-AP choices, AP 0 least significant.
std::uint64_t encode_joint_action(std::span<const std::size_t> per_ap_choices, std::size_t n_uavs);
std::vector<std::size_t> decode_joint_action(std::uint64_t index, std::size_t n_aps, std::size_t n_uavs);

/// n_uavs^n_aps, throwing if it overflows 64 bits.
std::uint64_t joint_action_count(std::size_t n_aps, std::size_t n_uavs);

}  // namespace cfmb
