#include <doctest.h>

#include <cmath>

#include "cfmb/channel.hpp"
#include "cfmb/deployment.hpp"

using namespace cfmb;

namespace {

// Independent evaluation of the sigmoid LoS law with a = 11.95, b = 0.14.
double los_oracle(double theta) { return 1.0 / (1.0 + 11.95 * std::exp(-0.14 * (theta - 11.95))); }

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("LoS probability reference values") {
  CHECK(los_probability(11.95) == doctest::Approx(1.0 / 12.95).epsilon(1e-12));
  CHECK(std::abs(los_probability(11.95) - 0.077220) < 1e-6);
  CHECK(std::abs(los_probability(90.0) - 0.999785) < 1e-6);
  // The rounded reference 0.015459 sits 3.8e-6 below the closed form 0.0154628.
  CHECK(std::abs(los_probability(0.0) - 0.015459) < 1e-5);
  CHECK(los_probability(0.0) == doctest::Approx(1.0 / (1.0 + 11.95 * std::exp(0.14 * 11.95))).epsilon(1e-12));
  for (double t = 0.0; t <= 90.0; t += 7.5) CHECK(los_probability(t) == doctest::Approx(los_oracle(t)));
}

TEST_CASE("LoS probability is strictly increasing and rejects bad angles") {
  double prev = -1.0;
  for (int i = 0; i <= 900; ++i) {
    const double p = los_probability(i * 0.1);
    CHECK(p > prev);
    prev = p;
  }
  CHECK_THROWS(los_probability(-1.0));
  CHECK_THROWS(los_probability(91.0));
}

TEST_CASE("elevation angles") {
  const Position ap{0, 0, 0};
  CHECK(elevation_angle({0, 0, 30}, ap) == doctest::Approx(90.0));
  CHECK(elevation_angle({30, 0, 30}, ap) == doctest::Approx(45.0));
  CHECK(elevation_angle({30 * std::sqrt(3.0), 0, 30}, ap) == doctest::Approx(30.0));
  CHECK_THROWS(elevation_angle(ap, ap));
}

TEST_CASE("uplink gain limits") {
  ChannelParams p;
  p.eta_los = p.eta_nlos = 1.0;
  const Position uav{10, 0, 30}, ap{0, 0, 0};
  const double d = std::sqrt(100.0 + 900.0);
  const double fspl = std::pow(4.0 * M_PI * d * p.f_ul / 299792458.0, 2.0);
  CHECK(uplink_gain(uav, ap, p, 1.0) == doctest::Approx(1.0 / fspl).epsilon(1e-12));

  ChannelParams q;
  const double theta = elevation_angle(uav, ap);
  const double pl = los_oracle(theta);
  const double mix = pl / q.eta_los + (1.0 - pl) / q.eta_nlos;
  CHECK(uplink_gain(uav, ap, q, 0.7) == doctest::Approx(mix / fspl * 0.7).epsilon(1e-12));
  CHECK(uplink_gain_state(uav, ap, q, 1.0, true) == doctest::Approx(1.0 / fspl).epsilon(1e-12));
}

TEST_CASE("uplink gain scales with the square of distance at fixed angle") {
  ChannelParams p;
  const Position ap{0, 0, 0};
  const double g1 = uplink_gain({10, 0, 10}, ap, p, 1.0);
  const double g2 = uplink_gain({20, 0, 20}, ap, p, 1.0);
  CHECK(g2 / g1 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("downlink gain") {
  ChannelParams p;
  const Position ap{0, 0, 0};
  CHECK(downlink_gain(ap, {1, 0, 0}, p, 0.3) == doctest::Approx(0.3));
  CHECK(downlink_gain(ap, {6, 0, 0}, p, 1.0) / downlink_gain(ap, {3, 0, 0}, p, 1.0) ==
        doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  // Coincident positions clamp to the minimum distance.
  CHECK(downlink_gain(ap, ap, p, 1.0) == doctest::Approx(std::pow(p.min_distance, -4.0)));
}

TEST_CASE("fading has unit mean and is reproducible") {
  Rng rng(123);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double b = sample_fading(rng);
    REQUIRE(b > 0.0);
    sum += b;
  }
  CHECK(std::abs(sum / n - 1.0) < 0.01);
  Rng a(4), b(4);
  CHECK(sample_fading(a) == sample_fading(b));
}

TEST_CASE("mean uplink gain grows as the UAV approaches an AP") {
  ChannelParams p;
  const Position ap{0, 0, 0};
  double prev = 0.0;
  for (double x = 60.0; x >= 0.0; x -= 10.0) {
    Rng rng(99);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) sum += uplink_gain({x, 0, 30}, ap, p, sample_fading(rng));
    CHECK(sum > prev);
    prev = sum;
  }
}

TEST_CASE("realized channels are positive, finite and seed-deterministic") {
  Rng drng(5);
  const auto d = make_deployment(DeploymentSpec{}, drng);
  ChannelParams p;
  Rng a(17), b(17);
  const auto c1 = realize_channels(d, p, a);
  const auto c2 = realize_channels(d, p, b);
  REQUIRE(c1.uplink.rows() == 4);
  REQUIRE(c1.uplink.cols() == 9);
  REQUIRE(c1.downlink.rows() == 9);
  REQUIRE(c1.downlink.cols() == 120);
  CHECK(c1.uplink == c2.uplink);
  CHECK(c1.downlink == c2.downlink);
  CHECK(c1.uplink.allFinite());
  CHECK(c1.downlink.allFinite());
  CHECK(c1.uplink.minCoeff() > 0.0);
  CHECK(c1.downlink.minCoeff() > 0.0);
}

TEST_CASE("with unit fading gains are a pure function of geometry") {
  Rng drng(6);
  const auto d = make_deployment(DeploymentSpec{}, drng);
  ChannelParams p;
  const auto ls = large_scale_gains(d, p);
  for (std::size_t u = 0; u < d.n_uavs(); ++u)
    for (std::size_t b = 0; b < d.n_aps(); ++b)
      CHECK(ls.uplink_mixture(u, b) == doctest::Approx(uplink_gain(d.uavs[u], d.aps[b], p, 1.0)).epsilon(1e-12));
  for (std::size_t b = 0; b < d.n_aps(); ++b)
    for (std::size_t v = 0; v < d.n_users(); v += 13)
      CHECK(ls.downlink(b, v) == doctest::Approx(downlink_gain(d.aps[b], d.users[v].pos, p, 1.0)).epsilon(1e-12));
}

}
