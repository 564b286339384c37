#include "cfmb/deployment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace cfmb {

double distance3d(const Position& a, const Position& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double distance2d(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::vector<Position> place_aps(GridDims dims, double spacing, double area_side) {
  if (dims.rows == 0 || dims.cols == 0) throw ConfigError("deployment.ap_grid: empty grid");
  if (spacing <= 0.0 && (dims.rows > 1 || dims.cols > 1))
    throw ConfigError("deployment.ap_spacing: must be positive");
  const double span_x = spacing * static_cast<double>(dims.cols - 1);
  const double span_y = spacing * static_cast<double>(dims.rows - 1);
  if (span_x > area_side || span_y > area_side)
    throw ConfigError("deployment.ap_grid: grid does not fit inside the serving area");

  const double x0 = 0.5 * (area_side - span_x);
  const double y0 = 0.5 * (area_side - span_y);
  std::vector<Position> aps;
  aps.reserve(dims.rows * dims.cols);
  for (std::size_t r = 0; r < dims.rows; ++r)
    for (std::size_t c = 0; c < dims.cols; ++c)
      aps.push_back({x0 + spacing * static_cast<double>(c), y0 + spacing * static_cast<double>(r), 0.0});
  return aps;
}

std::vector<Position> place_uavs(std::size_t count, double area_side, double height, Rng& rng) {
  if (count == 0) throw ConfigError("deployment.n_uavs: at least one UAV is required");
  if (height <= 0.0) throw ConfigError("deployment.uav_height: must be positive");
  std::vector<Position> uavs;
  uavs.reserve(count);
  std::uniform_real_distribution<double> u(0.0, area_side);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    uavs.push_back({x, y, height});
  }
  return uavs;
}

std::vector<User> place_users_pcp(const std::vector<Position>& cluster_centers, double radius,
                                  std::size_t n_users, double area_side, Rng& rng) {
  if (cluster_centers.empty()) throw ConfigError("deployment: no cluster centers");
  if (radius < 0.0) throw ConfigError("deployment.cluster_radius: must be non-negative");
  std::uniform_int_distribution<std::size_t> pick(0, cluster_centers.size() - 1);
  std::vector<User> users;
  users.reserve(n_users);
  for (std::size_t i = 0; i < n_users; ++i) {
    const std::size_t k = pick(rng);
    // sqrt of a uniform radius fraction gives a uniform density on the disk
    const double r = radius * std::sqrt(uniform01(rng));
    const double phi = 2.0 * M_PI * uniform01(rng);
    const auto& c = cluster_centers[k];
    const double x = std::clamp(c.x + r * std::cos(phi), 0.0, area_side);
    const double y = std::clamp(c.y + r * std::sin(phi), 0.0, area_side);
    users.push_back({{x, y, 0.0}, k});
  }
  return users;
}

Deployment make_deployment(const DeploymentSpec& spec, Rng& rng) {
  Deployment d;
  d.area_side = spec.area_side;
  d.ap_spacing = spec.ap_spacing;
  d.cluster_radius = spec.cluster_radius;
  d.ap_grid = spec.ap_grid;
  d.aps = place_aps(spec.ap_grid, spec.ap_spacing, spec.area_side);
  d.uavs = place_uavs(spec.n_uavs, spec.area_side, spec.uav_height, rng);

  std::vector<Position> centers;
  if (spec.cluster_centers) {
    if (spec.cluster_centers->size() != spec.n_uavs)
      throw ConfigError("deployment.cluster_centers: need one center per UAV");
    for (auto [x, y] : *spec.cluster_centers) centers.push_back({x, y, 0.0});
  } else {
    for (const auto& u : d.uavs) centers.push_back({u.x, u.y, 0.0});
  }
  d.users = place_users_pcp(centers, spec.cluster_radius, spec.n_users, spec.area_side, rng);
  return d;
}

void write_deployment(std::ostream& os, const Deployment& d) {
  os.precision(17);
  os << "# area_side " << d.area_side << " ap_spacing " << d.ap_spacing << " cluster_radius "
     << d.cluster_radius << " ap_grid " << d.ap_grid.rows << ' ' << d.ap_grid.cols << '\n';
  for (std::size_t i = 0; i < d.aps.size(); ++i)
    os << "ap " << i << ' ' << d.aps[i].x << ' ' << d.aps[i].y << ' ' << d.aps[i].z << " -1\n";
  for (std::size_t i = 0; i < d.uavs.size(); ++i)
    os << "uav " << i << ' ' << d.uavs[i].x << ' ' << d.uavs[i].y << ' ' << d.uavs[i].z << " -1\n";
  for (std::size_t i = 0; i < d.users.size(); ++i) {
    const auto& u = d.users[i];
    os << "user " << i << ' ' << u.pos.x << ' ' << u.pos.y << ' ' << u.pos.z << ' ' << u.cluster << '\n';
  }
}

Deployment read_deployment(std::istream& is) {
  Deployment d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    if (line[0] == '#') {
      std::string tag;
      ss >> tag;
      std::string key;
      while (ss >> key) {
        if (key == "area_side") ss >> d.area_side;
        else if (key == "ap_spacing") ss >> d.ap_spacing;
        else if (key == "cluster_radius") ss >> d.cluster_radius;
        else if (key == "ap_grid") ss >> d.ap_grid.rows >> d.ap_grid.cols;
      }
      continue;
    }
    std::string role;
    std::size_t id = 0;
    Position p;
    long long cluster = -1;
    if (!(ss >> role >> id >> p.x >> p.y >> p.z >> cluster))
      throw ConfigError("deployment record line " + std::to_string(lineno) + ": malformed");
    if (role == "ap") {
      d.aps.push_back(p);
    } else if (role == "uav") {
      d.uavs.push_back(p);
    } else if (role == "user") {
      if (cluster < 0) throw ConfigError("deployment record line " + std::to_string(lineno) + ": user without cluster");
      d.users.push_back({p, static_cast<std::size_t>(cluster)});
    } else {
      throw ConfigError("deployment record line " + std::to_string(lineno) + ": unknown role '" + role + "'");
    }
  }
  for (const auto& u : d.users)
    if (u.cluster >= d.uavs.size()) throw ConfigError("deployment record: user cluster out of range");
  return d;
}

}  // namespace cfmb
