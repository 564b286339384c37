#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "cfmb/deployment.hpp"
#include "cfmb/random.hpp"

namespace cfmb {

inline constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Link parameters, all linear SI units. Defaults follow the reference
/// deployment (48 dBm EIRP, 5 MHz, -91 dBm noise, 20 dB NLoS excess loss).
struct ChannelParams {
  double f_ul = 4.5e9;
  double f_dl = 5.5e9;
  double alpha_ul = 2.0;
  double alpha_dl = 4.0;
  double eta_los = 1.0;
  double eta_nlos = 100.0;
  double noise_power = dbm_to_watts(-91.0);
  double p_uav = dbm_to_watts(48.0);
  double p_ap = dbm_to_watts(48.0);
  double b_ul = 5e6;
  double b_dl = 5e6;
  double min_distance = 0.5;
  bool bernoulli_los = false;

  void validate() const;
};

/// LoS probability of the air-to-ground link for an elevation angle in degrees.
double los_probability(double elevation_deg);

/// Elevation angle (degrees) of a UAV as seen from an AP.
double elevation_angle(const Position& uav, const Position& ap);

/// Free-space path loss term (4 pi d f / c)^alpha (>= 1 for d f large enough).
double free_space_loss(double distance, double freq, double alpha);

/// Uplink power gain with the expected LoS/NLoS excess-loss mixture.
double uplink_gain(const Position& uav, const Position& ap, const ChannelParams& p, double fading);

/// Uplink power gain for a drawn LoS state (Bernoulli mode).
double uplink_gain_state(const Position& uav, const Position& ap, const ChannelParams& p, double fading,
                         bool los);

/// Downlink power gain d^-alpha * fading, distance clamped to p.min_distance.
double downlink_gain(const Position& ap, const Position& user, const ChannelParams& p, double fading);

/// Unit-mean exponential power sample: |g|^2 with g ~ CN(0, 1).
double sample_fading(Rng& rng);

/// uplink(u, b) and downlink(b, v), linear power gains.
struct ChannelRealization {
  Eigen::MatrixXd uplink;
  Eigen::MatrixXd downlink;
};

/// Geometry-only part of every link, computed once per deployment.
struct LargeScaleGains {
  Eigen::MatrixXd uplink_mixture;  // fading-free mixture gain
  Eigen::MatrixXd uplink_los;      // fading-free gain when LoS
  Eigen::MatrixXd uplink_nlos;     // fading-free gain when NLoS
  Eigen::MatrixXd los_prob;
  Eigen::MatrixXd downlink;
  bool bernoulli_los = false;
};

LargeScaleGains large_scale_gains(const Deployment& d, const ChannelParams& p);

ChannelRealization realize_channels(const LargeScaleGains& ls, Rng& rng);
ChannelRealization realize_channels(const Deployment& d, const ChannelParams& p, Rng& rng);

}  // namespace cfmb
