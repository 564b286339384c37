#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cfmb/video.hpp"

namespace cfmb {

/// Tiles picked for one re-scheduling slot: `tiles[u]` is UAV u's ordered
/// list (one tile per broadcast slot), `priority[u]` the matching scores.
struct Schedule {
  std::vector<std::vector<TileId>> tiles;
  std::vector<std::vector<double>> priority;
  std::size_t reschedule_index = 0;

  std::size_t n_uavs() const { return tiles.size(); }
  std::size_t per_uav() const { return tiles.empty() ? 0 : tiles.front().size(); }
};

/// Per-tile count of (user, past re-scheduling slot) pairs in which a
/// requesting user held a decoded copy of the tile. Reset every GOP.
class PpfHistory {
 public:
  PpfHistory() = default;
  explicit PpfHistory(std::size_t n_uavs) : counts_(n_uavs * kTilesPerUav, 0.0) {}

  double count(const TileId& t) const { return counts_[t.global_index()]; }
  void add(const TileId& t, double n) { counts_[t.global_index()] += n; }
  // Called at the end of every re-scheduling slot.
  void record_slot(const DecodeState& state);

 private:
  std::vector<double> counts_;
};

/// Users requesting `tile` whose copy is not decoded in the current frame and
/// would decode if received (the previous frame's copy is in place).
std::size_t pending_requesters(const TileId& tile, const DecodeState& state);

/// P-PF priority: pending requesters / (1 + history).
double ppf_priority(const TileId& tile, const DecodeState& state, const PpfHistory& history);

/// Top-k tiles per UAV from a [n_uavs][72] score table. Ties break by
/// (row, col). Tiles with non-positive score are ranked after positive
/// ones by `fallback_popularity` (if given), then by (row, col).
Schedule select_top_tiles(const std::vector<std::vector<double>>& priorities, std::size_t k_per_uav,
                          const std::vector<std::vector<double>>* fallback_popularity = nullptr);

/// P-PF scheduler for the whole network.
Schedule ppf_schedule(const DecodeState& state, const PpfHistory& history, std::size_t k_per_uav);

/// Per-UAV 2x6x12 popularity maps: channel 0 pending first transmissions,
/// channel 1 pending re-transmissions (received this GOP, chain broken).
/// Each UAV map is divided by its own maximum.
struct PopularityMaps {
  std::size_t n_uavs = 0;
  std::vector<double> data;  // [uav][channel][row][col]

  double& at(std::size_t u, std::size_t ch, std::size_t r, std::size_t c) {
    return data[((u * 2 + ch) * kTileRows + r) * kTileCols + c];
  }
  double at(std::size_t u, std::size_t ch, std::size_t r, std::size_t c) const {
    return data[((u * 2 + ch) * kTileRows + r) * kTileCols + c];
  }
};

/// Popularity over all users, or only over `users` when given.
PopularityMaps popularity_map(const DecodeState& state, std::optional<std::span<const std::size_t>> users = {});

}  // namespace cfmb
