#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cfmb/random.hpp"

namespace cfmb {

inline constexpr std::size_t kTileRows = 6;
inline constexpr std::size_t kTileCols = 12;
inline constexpr std::size_t kTilesPerUav = kTileRows * kTileCols;
inline constexpr std::size_t kFovRows = 5;
inline constexpr std::size_t kFovCols = 7;
inline constexpr std::size_t kTilesPerRequest = kFovRows * kFovCols;
inline constexpr double kTileDegrees = 30.0;

struct TileId {
  std::size_t uav = 0;
  std::size_t row = 0;
  std::size_t col = 0;

  std::size_t local_index() const { return row * kTileCols + col; }
  std::size_t global_index() const { return uav * kTilesPerUav + local_index(); }
  static TileId from_global(std::size_t g) {
    return {g / kTilesPerUav, (g % kTilesPerUav) / kTileCols, g % kTileCols};
  }

  friend bool operator==(const TileId&, const TileId&) = default;
  friend auto operator<=>(const TileId&, const TileId&) = default;
};

struct Viewpoint {
  double yaw_deg = 0.0;    // [0, 360)
  double pitch_deg = 0.0;  // positive looks up
};

struct PitchBand {
  double min_deg = -45.0;
  double max_deg = 45.0;
};

Viewpoint generate_viewpoint(Rng& rng, PitchBand band = {});

/// The 5x7 window of 30-degree tiles around a viewpoint: columns wrap
/// around the 360-degree seam, rows are shifted to stay on the sphere.
/// Result is sorted by (row, col).
std::vector<TileId> fov_to_tiles(const Viewpoint& vp, std::size_t uav);

enum class FrameKind { I, P };

inline FrameKind frame_kind(std::size_t frame_in_gop) { return frame_in_gop == 0 ? FrameKind::I : FrameKind::P; }

struct PayloadModel {
  double pixels_per_degree = 60.0;
  double bits_per_pixel = 12.0;
  double compression_rate = 150.0;
  double p_over_i_ratio = 0.7;

  void validate() const;
};

double tile_payload_bits(FrameKind kind, const PayloadModel& model);

/// Per-user FoV requests; every user requests exactly 35 tiles of one UAV.
class RequestSet {
 public:
  RequestSet() = default;
  RequestSet(std::vector<std::vector<TileId>> per_user, std::size_t n_uavs);

  std::size_t n_users() const { return per_user_.size(); }
  std::size_t n_uavs() const { return n_uavs_; }
  const std::vector<TileId>& tiles(std::size_t user) const { return per_user_[user]; }
  // Position of `tile` inside the user's request list, or -1.
  int slot_of(std::size_t user, const TileId& tile) const;
  bool requests(std::size_t user, const TileId& tile) const { return slot_of(user, tile) >= 0; }
  // Users requesting a tile, ascending.
  const std::vector<std::size_t>& requesters(const TileId& tile) const { return requesters_[tile.global_index()]; }

 private:
  std::vector<std::vector<TileId>> per_user_;
  std::vector<std::array<std::int8_t, kTilesPerUav>> slot_index_;
  std::vector<std::vector<std::size_t>> requesters_;
  std::size_t n_uavs_ = 0;
};

RequestSet make_requests(const std::vector<Viewpoint>& viewpoints, const std::vector<std::size_t>& user_uav,
                         std::size_t n_uavs);

/// Decode progress of every requested tile across the frames of one GOP.
class DecodeState {
 public:
  DecodeState() = default;
  explicit DecodeState(std::shared_ptr<const RequestSet> requests);

  std::size_t frame() const { return frame_; }
  void advance_frame();

  bool decoded(std::size_t user, std::size_t slot) const { return decoded_frame_[user][slot] == static_cast<int>(frame_); }
  bool decoded(std::size_t user, const TileId& tile) const;
  // Dependency of the current frame's copy is available (always for I frames).
  bool dependency_ok(std::size_t user, std::size_t slot) const;
  // Tile received at least once this GOP.
  bool ever_received(std::size_t user, std::size_t slot) const { return received_frame_[user][slot] >= 0; }
  int last_decoded_frame(std::size_t user, std::size_t slot) const { return decoded_frame_[user][slot]; }
  std::size_t decoded_count(std::size_t user) const { return decoded_count_[user]; }
  std::size_t requested_count(std::size_t user) const { return decoded_frame_[user].size(); }
  const RequestSet& requests() const { return *requests_; }

  // Internal mutation used by update_decode_state.
  bool apply(std::size_t user, std::size_t slot, bool received);

 private:
  std::shared_ptr<const RequestSet> requests_;
  std::vector<std::vector<int>> decoded_frame_;
  std::vector<std::vector<int>> received_frame_;
  std::vector<std::size_t> decoded_count_;
  std::size_t frame_ = 0;
};

/// Applies one reception outcome. I tiles decode iff received; P tiles also
/// need the same tile decoded in the previous frame. Returns true when the
/// tile became newly decoded.
bool update_decode_state(DecodeState& state, std::size_t user, const TileId& tile, bool received,
                         std::size_t frame_idx);

/// V-PSNR in dB: 10 log10(J / max(J - decoded, 1/J)).
double vpsnr(std::size_t n_requested, std::size_t n_decoded);
double vpsnr(std::span<const TileId> requested, std::span<const TileId> decoded);

/// Full-decode cap 20 log10(J).
double vpsnr_cap(std::size_t n_requested = kTilesPerRequest);

inline double vpsnr_gain(double prev_db, double cur_db) { return cur_db - prev_db; }

/// Sum over frames of (user-mean V-PSNR / cap); lies in [0, frames].
double normalized_gop_score(std::span<const double> per_frame_mean_vpsnr, std::size_t frames_per_gop = 5,
                            std::size_t n_requested = kTilesPerRequest);

}  // namespace cfmb
