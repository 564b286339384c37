#include "cfmb/scheduling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "cfmb/errors.hpp"

namespace cfmb {

void PpfHistory::record_slot(const DecodeState& state) {
  const auto& req = state.requests();
  for (std::size_t v = 0; v < req.n_users(); ++v) {
    const auto& tiles = req.tiles(v);
    for (std::size_t k = 0; k < tiles.size(); ++k)
      if (state.decoded(v, k)) counts_[tiles[k].global_index()] += 1.0;
  }
}

std::size_t pending_requesters(const TileId& tile, const DecodeState& state) {
  std::size_t n = 0;
  const auto& req = state.requests();
  for (auto v : req.requesters(tile)) {
    const int k = req.slot_of(v, tile);
    if (!state.decoded(v, static_cast<std::size_t>(k)) && state.dependency_ok(v, static_cast<std::size_t>(k))) ++n;
  }
  return n;
}

double ppf_priority(const TileId& tile, const DecodeState& state, const PpfHistory& history) {
  const auto pending = static_cast<double>(pending_requesters(tile, state));
  if (pending == 0.0) return 0.0;
  return pending / (1.0 + history.count(tile));
}

Schedule select_top_tiles(const std::vector<std::vector<double>>& priorities, std::size_t k_per_uav,
                          const std::vector<std::vector<double>>* fallback_popularity) {
  if (k_per_uav == 0) throw std::invalid_argument("select_top_tiles: k must be at least 1");
  if (k_per_uav > kTilesPerUav) throw ConfigError("time.slots_per_reschedule: exceeds the 72 tiles of a UAV");
  Schedule s;
  s.tiles.resize(priorities.size());
  s.priority.resize(priorities.size());
  for (std::size_t u = 0; u < priorities.size(); ++u) {
    const auto& p = priorities[u];
    if (p.size() != kTilesPerUav) throw std::invalid_argument("select_top_tiles: need 72 priorities per UAV");
    std::vector<std::size_t> order(kTilesPerUav);
    std::iota(order.begin(), order.end(), 0);
    const std::vector<double>* fb = fallback_popularity ? &(*fallback_popularity)[u] : nullptr;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const bool pa = p[a] > 0.0, pb = p[b] > 0.0;
      if (pa != pb) return pa;
      if (pa) return p[a] > p[b];
      if (fb && (*fb)[a] != (*fb)[b]) return (*fb)[a] > (*fb)[b];
      return false;  // stable: lexicographic (row, col) order
    });
    for (std::size_t i = 0; i < k_per_uav; ++i) {
      const std::size_t idx = order[i];
      s.tiles[u].push_back({u, idx / kTileCols, idx % kTileCols});
      s.priority[u].push_back(p[idx]);
    }
  }
  return s;
}

Schedule ppf_schedule(const DecodeState& state, const PpfHistory& history, std::size_t k_per_uav) {
  const auto n_uavs = state.requests().n_uavs();
  std::vector<std::vector<double>> prio(n_uavs, std::vector<double>(kTilesPerUav, 0.0));
  std::vector<std::vector<double>> popularity(n_uavs, std::vector<double>(kTilesPerUav, 0.0));
  for (std::size_t u = 0; u < n_uavs; ++u) {
    for (std::size_t i = 0; i < kTilesPerUav; ++i) {
      const TileId t{u, i / kTileCols, i % kTileCols};
      prio[u][i] = ppf_priority(t, state, history);
      popularity[u][i] = static_cast<double>(state.requests().requesters(t).size());
    }
  }
  return select_top_tiles(prio, k_per_uav, &popularity);
}

PopularityMaps popularity_map(const DecodeState& state, std::optional<std::span<const std::size_t>> users) {
  const auto& req = state.requests();
  PopularityMaps m;
  m.n_uavs = req.n_uavs();
  m.data.assign(m.n_uavs * 2 * kTilesPerUav, 0.0);

  auto visit = [&](std::size_t v) {
    const auto& tiles = req.tiles(v);
    for (std::size_t k = 0; k < tiles.size(); ++k) {
      if (state.decoded(v, k)) continue;
      const bool retx = !state.dependency_ok(v, k) && state.ever_received(v, k);
      m.at(tiles[k].uav, retx ? 1 : 0, tiles[k].row, tiles[k].col) += 1.0;
    }
  };
  if (users) {
    for (auto v : *users) visit(v);
  } else {
    for (std::size_t v = 0; v < req.n_users(); ++v) visit(v);
  }

  const std::size_t per_uav = 2 * kTilesPerUav;
  for (std::size_t u = 0; u < m.n_uavs; ++u) {
    auto first = m.data.begin() + static_cast<std::ptrdiff_t>(u * per_uav);
    auto last = first + static_cast<std::ptrdiff_t>(per_uav);
    const double mx = *std::max_element(first, last);
    if (mx > 0.0)
      for (auto it = first; it != last; ++it) *it /= mx;
  }
  return m;
}

}  // namespace cfmb
