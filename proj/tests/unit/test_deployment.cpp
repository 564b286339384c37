#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfmb/deployment.hpp"
#include "cfmb/errors.hpp"

using namespace cfmb;

TEST_SUITE("deployment") {

TEST_CASE("3x3 grid with 30 m spacing sits at 10, 40, 70") {
  const auto aps = place_aps({3, 3}, 30.0, 80.0);
  REQUIRE(aps.size() == 9);
  const double coords[] = {10.0, 40.0, 70.0};
  for (double x : coords)
    for (double y : coords) {
      const bool found = std::any_of(aps.begin(), aps.end(), [&](const Position& p) {
        return std::abs(p.x - x) < 1e-12 && std::abs(p.y - y) < 1e-12;
      });
      CHECK(found);
    }
}

TEST_CASE("single AP at the center") {
  const auto aps = place_aps({1, 1}, 123.0, 80.0);
  REQUIRE(aps.size() == 1);
  CHECK(aps[0].x == doctest::Approx(40.0));
  CHECK(aps[0].y == doctest::Approx(40.0));
}

TEST_CASE("grid larger than the area is rejected") {
  CHECK_THROWS_AS(place_aps({2, 2}, 100.0, 80.0), ConfigError);
}

TEST_CASE("nearest-neighbor distance of the grid equals the spacing") {
  for (double spacing : {5.0, 17.5, 30.0}) {
    const auto aps = place_aps({3, 3}, spacing, 80.0);
    for (std::size_t i = 0; i < aps.size(); ++i) {
      double nn = 1e300;
      for (std::size_t j = 0; j < aps.size(); ++j)
        if (i != j) nn = std::min(nn, distance2d(aps[i], aps[j]));
      CHECK(nn == doctest::Approx(spacing).epsilon(1e-12));
    }
  }
}

TEST_CASE("UAVs hover at the configured height inside the area") {
  Rng rng(7);
  const auto uavs = place_uavs(4, 80.0, 30.0, rng);
  REQUIRE(uavs.size() == 4);
  for (const auto& u : uavs) {
    CHECK(u.z == 30.0);
    CHECK(u.x >= 0.0);
    CHECK(u.x <= 80.0);
    CHECK(u.y >= 0.0);
    CHECK(u.y <= 80.0);
  }
}

TEST_CASE("UAV placement is seed-deterministic and count 0 is an error") {
  Rng a(11), b(11);
  CHECK(place_uavs(1, 80.0, 30.0, a) == place_uavs(1, 80.0, 30.0, b));
  Rng c(1);
  CHECK_THROWS(place_uavs(0, 80.0, 30.0, c));
}

TEST_CASE("PCP users stay within the cluster radius") {
  Rng rng(3);
  const std::vector<Position> centers{{20, 20, 0}, {60, 20, 0}, {20, 60, 0}, {60, 60, 0}};
  const auto users = place_users_pcp(centers, 20.0, 120, 80.0, rng);
  REQUIRE(users.size() == 120);
  for (const auto& u : users) {
    REQUIRE(u.cluster < centers.size());
    CHECK(distance2d(u.pos, centers[u.cluster]) <= 20.0 + 1e-12);
    CHECK(u.pos.z == 0.0);
  }
}

TEST_CASE("clipping never moves a user farther from its center") {
  Rng rng(5);
  const std::vector<Position> centers{{1, 1, 0}, {79, 2, 0}, {40, 79.5, 0}};
  const auto users = place_users_pcp(centers, 30.0, 2000, 80.0, rng);
  for (const auto& u : users) {
    CHECK(distance2d(u.pos, centers[u.cluster]) <= 30.0 + 1e-12);
    CHECK(u.pos.x >= 0.0);
    CHECK(u.pos.x <= 80.0);
    CHECK(u.pos.y >= 0.0);
    CHECK(u.pos.y <= 80.0);
  }
}

TEST_CASE("degenerate radius puts every user on its center") {
  Rng rng(9);
  const auto users = place_users_pcp({{40, 40, 0}}, 0.0, 10, 80.0, rng);
  for (const auto& u : users) {
    CHECK(u.pos.x == 40.0);
    CHECK(u.pos.y == 40.0);
  }
}

TEST_CASE("make_deployment is reproducible and clusters follow the UAVs") {
  DeploymentSpec spec;
  Rng a(42), b(42);
  const auto d1 = make_deployment(spec, a);
  const auto d2 = make_deployment(spec, b);
  REQUIRE(d1.n_aps() == 9);
  REQUIRE(d1.n_uavs() == 4);
  REQUIRE(d1.n_users() == 120);
  CHECK(d1.uavs == d2.uavs);
  for (std::size_t i = 0; i < d1.n_users(); ++i) {
    CHECK(d1.users[i].pos == d2.users[i].pos);
    CHECK(d1.users[i].cluster < d1.n_uavs());
    const auto& c = d1.uavs[d1.users[i].cluster];
    CHECK(distance2d(d1.users[i].pos, {c.x, c.y, 0.0}) <= spec.cluster_radius + 1e-12);
  }
}

TEST_CASE("deployment record round-trips") {
  Rng rng(8);
  const auto d = make_deployment(DeploymentSpec{}, rng);
  std::stringstream ss;
  write_deployment(ss, d);
  const auto back = read_deployment(ss);
  REQUIRE(back.n_aps() == d.n_aps());
  REQUIRE(back.n_users() == d.n_users());
  for (std::size_t i = 0; i < d.n_users(); ++i) {
    CHECK(back.users[i].cluster == d.users[i].cluster);
    CHECK(back.users[i].pos.x == doctest::Approx(d.users[i].pos.x).epsilon(1e-12));
  }
}

}
