#include "cfmb/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cfmb/errors.hpp"

namespace cfmb {

std::vector<double> mrc_weights(std::span<const double> uplink_gains) {
  if (uplink_gains.empty()) throw std::invalid_argument("mrc_weights: empty AP group");
  double norm2 = 0.0;
  for (double g : uplink_gains) {
    if (!(g > 0.0)) throw std::invalid_argument("mrc_weights: gains must be positive");
    norm2 += g;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  std::vector<double> w;
  w.reserve(uplink_gains.size());
  for (double g : uplink_gains) w.push_back(std::sqrt(g) * inv);
  return w;
}

double uplink_sinr(std::size_t target_uav, const ApGroup& ap_group, std::span<const std::size_t> active_uavs,
                   const ChannelRealization& ch, const ChannelParams& p, const PhyOptions& opt) {
  if (ap_group.empty()) throw std::invalid_argument("uplink_sinr: empty AP group");
  const auto u = static_cast<Eigen::Index>(target_uav);

  std::vector<double> gains;
  gains.reserve(ap_group.size());
  for (auto b : ap_group) gains.push_back(ch.uplink(u, static_cast<Eigen::Index>(b)));
  const auto w = mrc_weights(gains);

  double signal = 0.0;
  if (opt.coherent_mrc) {
    double amp = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) amp += w[i] * std::sqrt(gains[i]);
    signal = p.p_uav * amp * amp;
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) signal += p.p_uav * w[i] * w[i] * gains[i];
  }

  // Interference phases are independent of the combiner in both forms, so
  // each interferer contributes sum_b |w_b|^2 g_{u',b}.
  double interference = 0.0;
  for (auto other : active_uavs) {
    if (other == target_uav) continue;
    const auto uo = static_cast<Eigen::Index>(other);
    for (std::size_t i = 0; i < w.size(); ++i)
      interference += p.p_uav * w[i] * w[i] * ch.uplink(uo, static_cast<Eigen::Index>(ap_group[i]));
  }
  double noise = 0.0;
  for (double wi : w) noise += wi * wi * p.noise_power;
  return signal / (interference + noise);
}

std::complex<double> precoding_weight(std::span<const std::complex<double>> channels_to_users) {
  if (channels_to_users.empty()) throw std::invalid_argument("precoding_weight: empty user group");
  std::complex<double> acc{0.0, 0.0};
  for (const auto& h : channels_to_users) {
    const double n2 = std::norm(h);
    if (!(n2 > 0.0)) throw std::invalid_argument("precoding_weight: zero channel");
    acc += std::conj(h) / n2;
  }
  const double mag = std::abs(acc);
  if (!(mag > 0.0)) return {1.0, 0.0};
  return acc / mag;
}

std::complex<double> precoding_weight(std::span<const double> power_gains_to_users) {
  std::vector<std::complex<double>> h;
  h.reserve(power_gains_to_users.size());
  for (double g : power_gains_to_users) h.emplace_back(std::sqrt(g), 0.0);
  return precoding_weight(std::span<const std::complex<double>>(h));
}

void check_disjoint(std::span<const ApGroup> groups, std::size_t n_aps) {
  std::vector<char> seen(n_aps, 0);
  for (const auto& g : groups) {
    for (auto b : g) {
      if (b >= n_aps) throw StructuralError("AP index out of range in group");
      if (seen[b]) throw StructuralError("AP groups overlap");
      seen[b] = 1;
    }
  }
}

double downlink_sinr(const ApGroup& serving_group, std::size_t user, std::span<const ApGroup> all_groups,
                     const ChannelRealization& ch, const ChannelParams& p) {
  const auto n_aps = static_cast<std::size_t>(ch.downlink.rows());
  check_disjoint(all_groups, n_aps);
  const auto v = static_cast<Eigen::Index>(user);
  // Unit-magnitude precoders: |h w|^2 equals the link power gain.
  double signal = 0.0;
  for (auto b : serving_group) signal += p.p_ap * ch.downlink(static_cast<Eigen::Index>(b), v);

  std::vector<char> in_serving(n_aps, 0);
  for (auto b : serving_group) in_serving[b] = 1;
  double interference = 0.0;
  for (const auto& g : all_groups)
    for (auto b : g)
      if (!in_serving[b]) interference += p.p_ap * ch.downlink(static_cast<Eigen::Index>(b), v);
  return signal / (interference + p.noise_power);
}

double slot_capacity(double sinr, double bandwidth, double slot_seconds) {
  if (sinr < 0.0) throw std::invalid_argument("slot_capacity: negative SINR");
  return slot_seconds * bandwidth * std::log2(1.0 + sinr);
}

double group_broadcast_bits(const ApGroup& serving_group, std::span<const std::size_t> users,
                            std::span<const ApGroup> all_groups, const ChannelRealization& ch,
                            const ChannelParams& p, double slot_seconds) {
  if (users.empty()) throw std::invalid_argument("group_broadcast_bits: empty user group");
  double worst = std::numeric_limits<double>::infinity();
  for (auto v : users)
    worst = std::min(worst, slot_capacity(downlink_sinr(serving_group, v, all_groups, ch, p), p.b_dl, slot_seconds));
  return worst;
}

bool tile_success(double uplink_bits, double downlink_bits, double payload_bits) {
  if (!(payload_bits > 0.0)) throw std::invalid_argument("tile_success: payload must be positive");
  return uplink_bits >= payload_bits && downlink_bits >= payload_bits;
}

}  // namespace cfmb
