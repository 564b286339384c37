#include "cfmb/video.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfmb/errors.hpp"

namespace cfmb {

Viewpoint generate_viewpoint(Rng& rng, PitchBand band) {
  std::uniform_real_distribution<double> yaw(0.0, 360.0);
  std::uniform_real_distribution<double> pitch(band.min_deg, band.max_deg);
  Viewpoint vp;
  vp.yaw_deg = yaw(rng);
  if (vp.yaw_deg >= 360.0) vp.yaw_deg = 0.0;
  vp.pitch_deg = pitch(rng);
  return vp;
}

std::vector<TileId> fov_to_tiles(const Viewpoint& vp, std::size_t uav) {
  double yaw = std::fmod(vp.yaw_deg, 360.0);
  if (yaw < 0.0) yaw += 360.0;
  const auto center_col = static_cast<long>(std::floor(yaw / kTileDegrees)) % static_cast<long>(kTileCols);

  // Row 0 is the top band (pitch 60..90 degrees).
  const double pitch = std::clamp(vp.pitch_deg, -90.0, 90.0);
  const long center_row =
      std::min(static_cast<long>(kTileRows) - 1, static_cast<long>(std::floor((90.0 - pitch) / kTileDegrees)));
  const long half_rows = static_cast<long>(kFovRows / 2);
  const long row0 = std::clamp(center_row - half_rows, 0L, static_cast<long>(kTileRows - kFovRows));

  const long half_cols = static_cast<long>(kFovCols / 2);
  std::vector<TileId> tiles;
  tiles.reserve(kTilesPerRequest);
  for (long r = row0; r < row0 + static_cast<long>(kFovRows); ++r) {
    for (long dc = -half_cols; dc <= half_cols; ++dc) {
      const long c = ((center_col + dc) % static_cast<long>(kTileCols) + static_cast<long>(kTileCols)) %
                     static_cast<long>(kTileCols);
      tiles.push_back({uav, static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
    }
  }
  std::sort(tiles.begin(), tiles.end());
  return tiles;
}

void PayloadModel::validate() const {
  if (!(pixels_per_degree > 0.0)) throw ConfigError("video.pixels_per_degree: must be positive");
  if (!(bits_per_pixel > 0.0)) throw ConfigError("video.bits_per_pixel: must be positive");
  if (!(compression_rate > 0.0)) throw ConfigError("video.compression_rate: must be positive");
  if (!(p_over_i_ratio > 0.0 && p_over_i_ratio <= 1.0))
    throw ConfigError("video.p_over_i_ratio: must lie in (0, 1]");
}

double tile_payload_bits(FrameKind kind, const PayloadModel& model) {
  const double side = kTileDegrees * model.pixels_per_degree;
  const double raw = side * side * model.bits_per_pixel;
  const double i_bits = raw / model.compression_rate;
  return kind == FrameKind::I ? i_bits : i_bits * model.p_over_i_ratio;
}

RequestSet::RequestSet(std::vector<std::vector<TileId>> per_user, std::size_t n_uavs)
    : per_user_(std::move(per_user)), n_uavs_(n_uavs) {
  slot_index_.resize(per_user_.size());
  requesters_.assign(n_uavs_ * kTilesPerUav, {});
  for (std::size_t v = 0; v < per_user_.size(); ++v) {
    slot_index_[v].fill(-1);
    const auto& tiles = per_user_[v];
    if (tiles.size() > 127) throw std::invalid_argument("RequestSet: too many tiles for one user");
    for (std::size_t k = 0; k < tiles.size(); ++k) {
      if (tiles[k].uav >= n_uavs_) throw std::invalid_argument("RequestSet: tile of unknown UAV");
      if (k > 0 && tiles[k].uav != tiles[0].uav)
        throw std::invalid_argument("RequestSet: a user requests tiles of a single UAV");
      if (slot_index_[v][tiles[k].local_index()] >= 0) throw std::invalid_argument("RequestSet: duplicate tile");
      slot_index_[v][tiles[k].local_index()] = static_cast<std::int8_t>(k);
      requesters_[tiles[k].global_index()].push_back(v);
    }
  }
}

int RequestSet::slot_of(std::size_t user, const TileId& tile) const {
  const auto& tiles = per_user_[user];
  if (tiles.empty() || tiles[0].uav != tile.uav) return -1;
  return slot_index_[user][tile.local_index()];
}

RequestSet make_requests(const std::vector<Viewpoint>& viewpoints, const std::vector<std::size_t>& user_uav,
                         std::size_t n_uavs) {
  if (viewpoints.size() != user_uav.size()) throw std::invalid_argument("make_requests: size mismatch");
  std::vector<std::vector<TileId>> per_user;
  per_user.reserve(viewpoints.size());
  for (std::size_t v = 0; v < viewpoints.size(); ++v) per_user.push_back(fov_to_tiles(viewpoints[v], user_uav[v]));
  return RequestSet(std::move(per_user), n_uavs);
}

DecodeState::DecodeState(std::shared_ptr<const RequestSet> requests) : requests_(std::move(requests)) {
  const auto n = requests_->n_users();
  decoded_frame_.resize(n);
  received_frame_.resize(n);
  decoded_count_.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    decoded_frame_[v].assign(requests_->tiles(v).size(), -1);
    received_frame_[v].assign(requests_->tiles(v).size(), -1);
  }
}

void DecodeState::advance_frame() {
  ++frame_;
  std::fill(decoded_count_.begin(), decoded_count_.end(), 0);
}

bool DecodeState::decoded(std::size_t user, const TileId& tile) const {
  const int k = requests_->slot_of(user, tile);
  return k >= 0 && decoded(user, static_cast<std::size_t>(k));
}

bool DecodeState::dependency_ok(std::size_t user, std::size_t slot) const {
  return frame_ == 0 || decoded_frame_[user][slot] == static_cast<int>(frame_) - 1;
}

bool DecodeState::apply(std::size_t user, std::size_t slot, bool received) {
  if (decoded(user, slot)) return false;
  if (!received) return false;
  const bool dep = dependency_ok(user, slot);
  received_frame_[user][slot] = static_cast<int>(frame_);
  if (!dep) return false;
  decoded_frame_[user][slot] = static_cast<int>(frame_);
  ++decoded_count_[user];
  return true;
}

bool update_decode_state(DecodeState& state, std::size_t user, const TileId& tile, bool received,
                         std::size_t frame_idx) {
  if (frame_idx != state.frame()) throw std::invalid_argument("update_decode_state: frame index mismatch");
  const int k = state.requests().slot_of(user, tile);
  if (k < 0) throw std::invalid_argument("update_decode_state: tile not requested by user");
  return state.apply(user, static_cast<std::size_t>(k), received);
}

double vpsnr(std::size_t n_requested, std::size_t n_decoded) {
  if (n_requested == 0) throw std::invalid_argument("vpsnr: empty request set");
  if (n_decoded > n_requested) throw std::invalid_argument("vpsnr: decoded exceeds requested");
  const double j = static_cast<double>(n_requested);
  const double missing = std::max(static_cast<double>(n_requested - n_decoded), 1.0 / j);
  return 10.0 * std::log10(j / missing);
}

double vpsnr(std::span<const TileId> requested, std::span<const TileId> decoded) {
  for (const auto& t : decoded)
    if (std::find(requested.begin(), requested.end(), t) == requested.end())
      throw std::invalid_argument("vpsnr: decoded tile was not requested");
  return vpsnr(requested.size(), decoded.size());
}

double vpsnr_cap(std::size_t n_requested) { return 20.0 * std::log10(static_cast<double>(n_requested)); }

double normalized_gop_score(std::span<const double> per_frame_mean_vpsnr, std::size_t frames_per_gop,
                            std::size_t n_requested) {
  if (per_frame_mean_vpsnr.size() != frames_per_gop)
    throw std::invalid_argument("normalized_gop_score: expected one value per GOP frame");
  const double cap = vpsnr_cap(n_requested);
  double score = 0.0;
  for (double v : per_frame_mean_vpsnr) score += std::clamp(v / cap, 0.0, 1.0);
  return score;
}

}  // namespace cfmb
