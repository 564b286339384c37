#include "cfmb/association.hpp"

#include <stdexcept>

#include "cfmb/scheduling.hpp"

namespace cfmb {

std::vector<std::size_t> VirtualCellMap::active_uavs() const {
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < groups.size(); ++u)
    if (!groups[u].empty()) out.push_back(u);
  return out;
}

VirtualCellMap form_virtual_cells(std::span<const std::size_t> per_ap_choices, std::size_t n_uavs) {
  if (n_uavs == 0) throw std::invalid_argument("form_virtual_cells: no UAVs");
  VirtualCellMap m;
  m.choice.assign(per_ap_choices.begin(), per_ap_choices.end());
  m.groups.assign(n_uavs, {});
  for (std::size_t b = 0; b < m.choice.size(); ++b) {
    if (m.choice[b] >= n_uavs) throw std::invalid_argument("form_virtual_cells: UAV index out of range");
    m.groups[m.choice[b]].push_back(b);
  }
  return m;
}

bool in_window(const Position& center, const Position& p, double side) {
  const double h = side / 2.0;
  return p.x >= center.x - h && p.x < center.x + h && p.y >= center.y - h && p.y < center.y + h;
}

std::size_t cb_pick(std::span<const std::size_t> counts_per_uav) {
  if (counts_per_uav.empty()) throw std::invalid_argument("cb_pick: no UAVs");
  std::size_t best = 0;
  for (std::size_t u = 1; u < counts_per_uav.size(); ++u)
    if (counts_per_uav[u] > counts_per_uav[best]) best = u;
  return best;
}

std::size_t cb_decide(std::size_t ap, const Deployment& d, const DecodeState& state,
                      std::span<const TileId> current_tiles, double window_side) {
  if (current_tiles.empty()) throw std::invalid_argument("cb_decide: empty schedule");
  if (ap >= d.n_aps()) throw std::invalid_argument("cb_decide: AP index out of range");
  std::vector<std::size_t> counts(current_tiles.size(), 0);
  for (std::size_t u = 0; u < current_tiles.size(); ++u) {
    for (auto v : state.requests().requesters(current_tiles[u])) {
      const auto k = static_cast<std::size_t>(state.requests().slot_of(v, current_tiles[u]));
      if (state.decoded(v, k) || !state.dependency_ok(v, k)) continue;
      if (in_window(d.aps[ap], d.users[v].pos, window_side)) ++counts[u];
    }
  }
  return cb_pick(counts);
}

VirtualCellMap cf_decide(std::span<const double> priority_per_uav, std::size_t n_aps) {
  if (priority_per_uav.empty()) throw std::invalid_argument("cf_decide: empty priorities");
  std::size_t best = 0;
  for (std::size_t u = 1; u < priority_per_uav.size(); ++u)
    if (priority_per_uav[u] > priority_per_uav[best]) best = u;
  std::vector<std::size_t> choice(n_aps, best);
  return form_virtual_cells(choice, priority_per_uav.size());
}

std::uint64_t joint_action_count(std::size_t n_aps, std::size_t n_uavs) {
  if (n_uavs == 0) throw std::invalid_argument("joint_action_count: no UAVs");
  std::uint64_t n = 1;
  for (std::size_t b = 0; b < n_aps; ++b) {
    if (n > UINT64_MAX / n_uavs) throw std::overflow_error("joint_action_count: action space too large");
    n *= n_uavs;
  }
  return n;
}

std::uint64_t encode_joint_action(std::span<const std::size_t> per_ap_choices, std::size_t n_uavs) {
  joint_action_count(per_ap_choices.size(), n_uavs);
  std::uint64_t index = 0;
  for (std::size_t i = per_ap_choices.size(); i-- > 0;) {
    if (per_ap_choices[i] >= n_uavs) throw std::invalid_argument("encode_joint_action: choice out of range");
    index = index * n_uavs + per_ap_choices[i];
  }
  return index;
}

std::vector<std::size_t> decode_joint_action(std::uint64_t index, std::size_t n_aps, std::size_t n_uavs) {
  if (index >= joint_action_count(n_aps, n_uavs)) throw std::invalid_argument("decode_joint_action: index out of range");
  std::vector<std::size_t> choices(n_aps);
  for (std::size_t b = 0; b < n_aps; ++b) {
    choices[b] = static_cast<std::size_t>(index % n_uavs);
    index /= n_uavs;
  }
  return choices;
}

}  // namespace cfmb
