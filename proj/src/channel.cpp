#include "cfmb/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfmb {

void ChannelParams::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("channel.") + key + ": must be positive");
  };
  positive(f_ul, "f_ul");
  positive(f_dl, "f_dl");
  positive(alpha_ul, "alpha_ul");
  positive(alpha_dl, "alpha_dl");
  positive(eta_los, "eta_los_db");
  positive(eta_nlos, "eta_nlos_db");
  positive(noise_power, "noise_dbm");
  positive(b_ul, "b_ul");
  positive(b_dl, "b_dl");
  positive(min_distance, "min_distance");
  if (!(p_uav >= 0.0)) throw ConfigError("channel.p_uav_dbm: must be non-negative");
  if (!(p_ap >= 0.0)) throw ConfigError("channel.p_ap_dbm: must be non-negative");
  if (eta_nlos < eta_los) throw ConfigError("channel.eta_nlos_db: must not be below eta_los_db");
}

double los_probability(double elevation_deg) {
  if (!(elevation_deg >= 0.0 && elevation_deg <= 90.0))
    throw std::invalid_argument("los_probability: elevation outside [0, 90] degrees");
  return 1.0 / (1.0 + 11.95 * std::exp(-0.14 * (elevation_deg - 11.95)));
}

double elevation_angle(const Position& uav, const Position& ap) {
  const double d = distance3d(uav, ap);
  const double h = uav.z - ap.z;
  if (!(d > 0.0) || !(h > 0.0)) throw std::invalid_argument("elevation_angle: degenerate geometry");
  return 180.0 / M_PI * std::asin(std::min(1.0, h / d));
}

double free_space_loss(double distance, double freq, double alpha) {
  return std::pow(4.0 * M_PI * distance * freq / kSpeedOfLight, alpha);
}

namespace {

double excess_mixture(double p_los, const ChannelParams& p) {
  return p_los / p.eta_los + (1.0 - p_los) / p.eta_nlos;
}

}  // namespace

double uplink_gain(const Position& uav, const Position& ap, const ChannelParams& p, double fading) {
  const double d = distance3d(uav, ap);
  const double p_los = los_probability(elevation_angle(uav, ap));
  return excess_mixture(p_los, p) / free_space_loss(d, p.f_ul, p.alpha_ul) * fading;
}

double uplink_gain_state(const Position& uav, const Position& ap, const ChannelParams& p, double fading,
                         bool los) {
  const double d = distance3d(uav, ap);
  return (los ? 1.0 / p.eta_los : 1.0 / p.eta_nlos) / free_space_loss(d, p.f_ul, p.alpha_ul) * fading;
}

double downlink_gain(const Position& ap, const Position& user, const ChannelParams& p, double fading) {
  const double d = std::max(distance3d(ap, user), p.min_distance);
  return std::pow(d, -p.alpha_dl) * fading;
}

double sample_fading(Rng& rng) {
  // CN(0,1): real and imaginary parts each carry variance 1/2.
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  const double g = re * re + im * im;
  return g > 0.0 ? g : std::numeric_limits<double>::min();
}

LargeScaleGains large_scale_gains(const Deployment& d, const ChannelParams& p) {
  const auto nu = static_cast<Eigen::Index>(d.n_uavs());
  const auto nb = static_cast<Eigen::Index>(d.n_aps());
  const auto nv = static_cast<Eigen::Index>(d.n_users());
  LargeScaleGains ls;
  ls.bernoulli_los = p.bernoulli_los;
  ls.uplink_mixture.resize(nu, nb);
  ls.uplink_los.resize(nu, nb);
  ls.uplink_nlos.resize(nu, nb);
  ls.los_prob.resize(nu, nb);
  for (Eigen::Index u = 0; u < nu; ++u) {
    for (Eigen::Index b = 0; b < nb; ++b) {
      const auto& uav = d.uavs[static_cast<std::size_t>(u)];
      const auto& ap = d.aps[static_cast<std::size_t>(b)];
      ls.uplink_mixture(u, b) = uplink_gain(uav, ap, p, 1.0);
      ls.uplink_los(u, b) = uplink_gain_state(uav, ap, p, 1.0, true);
      ls.uplink_nlos(u, b) = uplink_gain_state(uav, ap, p, 1.0, false);
      ls.los_prob(u, b) = los_probability(elevation_angle(uav, ap));
    }
  }
  ls.downlink.resize(nb, nv);
  for (Eigen::Index b = 0; b < nb; ++b)
    for (Eigen::Index v = 0; v < nv; ++v)
      ls.downlink(b, v) = downlink_gain(d.aps[static_cast<std::size_t>(b)],
                                        d.users[static_cast<std::size_t>(v)].pos, p, 1.0);
  return ls;
}

ChannelRealization realize_channels(const LargeScaleGains& ls, Rng& rng) {
  ChannelRealization ch;
  ch.uplink.resize(ls.uplink_mixture.rows(), ls.uplink_mixture.cols());
  for (Eigen::Index b = 0; b < ch.uplink.cols(); ++b) {
    for (Eigen::Index u = 0; u < ch.uplink.rows(); ++u) {
      const double beta = sample_fading(rng);
      if (ls.bernoulli_los) {
        const bool los = uniform01(rng) < ls.los_prob(u, b);
        ch.uplink(u, b) = (los ? ls.uplink_los(u, b) : ls.uplink_nlos(u, b)) * beta;
      } else {
        ch.uplink(u, b) = ls.uplink_mixture(u, b) * beta;
      }
    }
  }
  ch.downlink.resize(ls.downlink.rows(), ls.downlink.cols());
  for (Eigen::Index v = 0; v < ch.downlink.cols(); ++v)
    for (Eigen::Index b = 0; b < ch.downlink.rows(); ++b) ch.downlink(b, v) = ls.downlink(b, v) * sample_fading(rng);
  return ch;
}

ChannelRealization realize_channels(const Deployment& d, const ChannelParams& p, Rng& rng) {
  return realize_channels(large_scale_gains(d, p), rng);
}

}  // namespace cfmb
