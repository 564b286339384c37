#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cfmb/channel.hpp"

namespace cfmb {

using ApGroup = std::vector<std::size_t>;

struct PhyOptions {
  // Coherent combining |sum w h|^2 instead of the per-branch power sum.
  bool coherent_mrc = false;
};

/// Weighted MRC magnitudes for one AP group: w_b = sqrt(g_b) / ||h||_F.
std::vector<double> mrc_weights(std::span<const double> uplink_gains);

/// Uplink SINR of `target_uav` at `ap_group`, with every other UAV listed in
/// `active_uavs` interfering. Default form sums per-branch powers.
double uplink_sinr(std::size_t target_uav, const ApGroup& ap_group, std::span<const std::size_t> active_uavs,
                   const ChannelRealization& ch, const ChannelParams& p, const PhyOptions& opt = {});

/// Sum-maximum precoder of one AP toward the users it serves, unit magnitude.
std::complex<double> precoding_weight(std::span<const std::complex<double>> channels_to_users);

/// Precoder for power-gain-only channels (real positive amplitudes).
std::complex<double> precoding_weight(std::span<const double> power_gains_to_users);

/// Downlink SINR of `user` served by `serving_group`; APs in the other
/// groups of `all_groups` interfere. Groups must be disjoint.
double downlink_sinr(const ApGroup& serving_group, std::size_t user, std::span<const ApGroup> all_groups,
                     const ChannelRealization& ch, const ChannelParams& p);

/// Bits deliverable in one slot: T_b * B * log2(1 + sinr).
double slot_capacity(double sinr, double bandwidth, double slot_seconds);

/// Broadcast-decodable payload of a user group: the worst user's capacity.
double group_broadcast_bits(const ApGroup& serving_group, std::span<const std::size_t> users,
                            std::span<const ApGroup> all_groups, const ChannelRealization& ch,
                            const ChannelParams& p, double slot_seconds);

/// Decode-and-forward success: both legs must carry the payload.
bool tile_success(double uplink_bits, double downlink_bits, double payload_bits);

/// Throws StructuralError if any AP appears in two groups.
void check_disjoint(std::span<const ApGroup> groups, std::size_t n_aps);

}  // namespace cfmb
