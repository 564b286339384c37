#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfmb/errors.hpp"
#include "cfmb/random.hpp"

namespace cfmb {

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

double distance3d(const Position& a, const Position& b);
double distance2d(const Position& a, const Position& b);

struct User {
  Position pos;
  std::size_t cluster = 0;  // index of the UAV the user requests video from
};

struct GridDims {
  std::size_t rows = 3;
  std::size_t cols = 3;
};

/// Static geometry of one episode. Immutable once built.
struct Deployment {
  std::vector<Position> aps;
  std::vector<Position> uavs;
  std::vector<User> users;
  double area_side = 80.0;
  double ap_spacing = 30.0;
  double cluster_radius = 20.0;
  GridDims ap_grid{};

  std::size_t n_aps() const { return aps.size(); }
  std::size_t n_uavs() const { return uavs.size(); }
  std::size_t n_users() const { return users.size(); }
};

/// Regular AP grid centered in the square serving area.
std::vector<Position> place_aps(GridDims dims, double spacing, double area_side);

/// Uniform i.i.d. UAV positions over the area at a fixed hovering height.
std::vector<Position> place_uavs(std::size_t count, double area_side, double height, Rng& rng);

/// Poisson-cluster users: uniform cluster choice, uniform-in-disk offset
/// around the center, clipped to [0, area_side]^2.
std::vector<User> place_users_pcp(const std::vector<Position>& cluster_centers, double radius,
                                  std::size_t n_users, double area_side, Rng& rng);

struct DeploymentSpec {
  GridDims ap_grid{3, 3};
  double ap_spacing = 30.0;
  double area_side = 80.0;
  std::size_t n_uavs = 4;
  double uav_height = 30.0;
  std::size_t n_users = 120;
  double cluster_radius = 20.0;
  // Optional override of the PCP cluster centers (x, y); defaults to UAV positions.
  std::optional<std::vector<std::pair<double, double>>> cluster_centers;
};

Deployment make_deployment(const DeploymentSpec& spec, Rng& rng);

// Record file: one node per line "role id x y z cluster_id".
void write_deployment(std::ostream& os, const Deployment& d);
Deployment read_deployment(std::istream& is);

}  // namespace cfmb
