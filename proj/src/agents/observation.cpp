#include "cfmb/agents/observation.hpp"

#include <algorithm>
#include <cmath>

namespace cfmb::agents {

std::optional<std::pair<std::size_t, std::size_t>> GridFrame::locate(const Position& p, bool clamp_edges) const {
  const double span = cell * static_cast<double>(side);
  double fx = (p.x - x0) / cell;
  double fy = (p.y - y0) / cell;
  if (clamp_edges) {
    // Points on the far boundary of the area belong to the last cell.
    if (p.x - x0 >= span && p.x - x0 <= span + 1e-9) fx = static_cast<double>(side) - 0.5;
    if (p.y - y0 >= span && p.y - y0 <= span + 1e-9) fy = static_cast<double>(side) - 0.5;
  }
  if (fx < 0.0 || fy < 0.0 || fx >= static_cast<double>(side) || fy >= static_cast<double>(side)) return std::nullopt;
  return std::make_pair(static_cast<std::size_t>(fy), static_cast<std::size_t>(fx));
}

namespace {

std::size_t cells_for(double extent, double cell) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(extent / cell - 1e-9)));
}

// Fills the 3-maps-per-UAV stack for one frame of reference.
std::vector<double> build_maps(const EpisodeState& s, const GridFrame& g, const ObservationSpec& spec,
                               bool clamp_edges) {
  const std::size_t U = s.n_uavs();
  const std::size_t hw = g.side * g.side;
  std::vector<double> obs(3 * U * hw, 0.0);
  auto at = [&](std::size_t u, std::size_t m, std::size_t r, std::size_t c) -> double& {
    return obs[(u * 3 + m) * hw + r * g.side + c];
  };
  for (std::size_t u = 0; u < U; ++u)
    if (auto rc = g.locate(s.deployment.uavs[u], clamp_edges)) at(u, 0, rc->first, rc->second) = 1.0;
  for (const auto& ap : s.deployment.aps)
    if (auto rc = g.locate(ap, clamp_edges))
      for (std::size_t u = 0; u < U; ++u) at(u, 1, rc->first, rc->second) = 1.0;

  const auto w = user_request_weights(s, spec.mode);
  double mx = 0.0;
  for (std::size_t v = 0; v < s.n_users(); ++v) {
    if (w[v] == 0.0) continue;
    const auto& user = s.deployment.users[v];
    if (auto rc = g.locate(user.pos, clamp_edges)) {
      double& cell = at(user.cluster, 2, rc->first, rc->second);
      cell += w[v];
      mx = std::max(mx, cell);
    }
  }
  if (mx > 0.0)
    for (std::size_t u = 0; u < U; ++u)
      for (std::size_t i = 0; i < hw; ++i) obs[(u * 3 + 2) * hw + i] /= mx;
  return obs;
}

}  // namespace

GridFrame global_frame(const EpisodeState& s, const ObservationSpec& spec) {
  return {0.0, 0.0, spec.cell, cells_for(s.deployment.area_side, spec.cell)};
}

GridFrame local_frame(const EpisodeState& s, std::size_t ap, const ObservationSpec& spec) {
  const auto& p = s.deployment.aps.at(ap);
  return {p.x - spec.window / 2.0, p.y - spec.window / 2.0, spec.cell, cells_for(spec.window, spec.cell)};
}

void normalize_by_max(std::span<double> values) {
  double mx = 0.0;
  for (double v : values) mx = std::max(mx, v);
  if (mx > 0.0)
    for (double& v : values) v /= mx;
}

std::vector<double> user_request_weights(const EpisodeState& s, RequesterMode mode) {
  std::vector<double> w(s.n_users(), 0.0);
  if (s.schedule.tiles.empty()) return w;
  const auto& req = *s.requests;
  for (std::size_t u = 0; u < s.n_uavs(); ++u) {
    const auto& tiles = s.schedule.tiles[u];
    const std::size_t first = mode == RequesterMode::Current ? s.slot : 0;
    const std::size_t last = mode == RequesterMode::Current ? s.slot + 1 : tiles.size();
    for (std::size_t i = first; i < last && i < tiles.size(); ++i) {
      for (auto v : req.requesters(tiles[i])) {
        const auto k = static_cast<std::size_t>(req.slot_of(v, tiles[i]));
        if (!s.decode.decoded(v, k) && s.decode.dependency_ok(v, k)) w[v] += 1.0;
      }
    }
  }
  return w;
}

std::vector<double> build_global_observation(const EpisodeState& s, const ObservationSpec& spec) {
  return build_maps(s, global_frame(s, spec), spec, true);
}

std::vector<double> build_local_observation(const EpisodeState& s, std::size_t ap, const ObservationSpec& spec) {
  return build_maps(s, local_frame(s, ap, spec), spec, false);
}

std::vector<double> build_scheduler_observation(const EpisodeState& s, const ObservationSpec& spec) {
  const std::size_t U = s.n_uavs();
  const std::size_t rows = s.deployment.ap_grid.rows;
  const std::size_t cols = s.deployment.ap_grid.cols;
  const std::size_t H = rows * kTileRows, W = cols * kTileCols;
  std::vector<double> obs(2 * U * H * W, 0.0);
  for (std::size_t b = 0; b < s.n_aps(); ++b) {
    std::vector<std::size_t> users;
    for (std::size_t v = 0; v < s.n_users(); ++v)
      if (in_window(s.deployment.aps[b], s.deployment.users[v].pos, spec.window)) users.push_back(v);
    const auto m = popularity_map(s.decode, std::span<const std::size_t>(users));
    const std::size_t r0 = (b / cols) * kTileRows, c0 = (b % cols) * kTileCols;
    for (std::size_t u = 0; u < U; ++u)
      for (std::size_t ch = 0; ch < 2; ++ch)
        for (std::size_t r = 0; r < kTileRows; ++r)
          for (std::size_t c = 0; c < kTileCols; ++c)
            obs[((u * 2 + ch) * H + r0 + r) * W + c0 + c] = m.at(u, ch, r, c);
  }
  return obs;
}

ObsShape global_shape(const SimConfig& cfg, const ObservationSpec& spec) {
  const auto side = cells_for(cfg.deployment.area_side, spec.cell);
  return {3 * cfg.deployment.n_uavs, side, side};
}

ObsShape local_shape(const SimConfig& cfg, const ObservationSpec& spec) {
  const auto side = cells_for(spec.window, spec.cell);
  return {3 * cfg.deployment.n_uavs, side, side};
}

ObsShape scheduler_shape(const SimConfig& cfg) {
  return {2 * cfg.deployment.n_uavs, cfg.deployment.ap_grid.rows * kTileRows, cfg.deployment.ap_grid.cols * kTileCols};
}

double local_reward(const EpisodeState& s, std::size_t ap, std::span<const double> user_gain, double window) {
  double r = 0.0;
  for (std::size_t v = 0; v < user_gain.size(); ++v)
    if (user_gain[v] != 0.0 && in_window(s.deployment.aps[ap], s.deployment.users[v].pos, window)) r += user_gain[v];
  return r;
}

}  // namespace cfmb::agents
