#include <doctest.h>

#include <string>

#include "cfmb/config.hpp"
#include "cfmb/errors.hpp"

using namespace cfmb;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("empty documents give the defaults") {
  const ExperimentConfig d;
  CHECK(to_json(parse_config_text("")) == to_json(d));
  CHECK(to_json(parse_config_text("  \n")) == to_json(d));
  CHECK(to_json(parse_config_text("{}")) == to_json(d));
}

TEST_CASE("default values") {
  const auto c = parse_config_text("{}");
  CHECK(c.sim.deployment.ap_grid.rows == 3);
  CHECK(c.sim.deployment.n_uavs == 4);
  CHECK(c.sim.deployment.n_users == 120);
  CHECK(c.sim.time.slots_per_gop() == 1400);
  const auto j = to_json(c);
  CHECK(j["channel"]["p_uav_dbm"].get<double>() == doctest::Approx(48.0));
}

TEST_CASE("invalid values name their key") {
  CHECK(error_of(R"({"channel": {"b_ul": -1}})").rfind("channel.b_ul", 0) == 0);
  CHECK(error_of(R"({"deployment": {"ap_grid": [0, 3]}})").rfind("deployment.ap_grid", 0) == 0);
  CHECK(error_of(R"({"deployment": {"n_users": "many"}})").rfind("deployment.n_users", 0) == 0);
  CHECK(error_of(R"({"agent": {"gamma": 1.5}})").rfind("agent.gamma", 0) == 0);
  CHECK(error_of(R"({"agent": {"requester_map": "all"}})").rfind("agent.requester_map", 0) == 0);
  CHECK(error_of(R"({"sweep": {"axis": "weather"}})").rfind("sweep.axis", 0) == 0);
}

TEST_CASE("unknown keys and malformed documents are rejected") {
  CHECK(error_of(R"({"channel": {"b_ull": 5e6}})").rfind("channel.b_ull", 0) == 0);
  CHECK(error_of(R"({"colour": 1})").find("colour") != std::string::npos);
  CHECK(error_of("{\"seed\": ").find("malformed") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/cfmb.json"), ConfigError);
}

TEST_CASE("documents round-trip") {
  const auto c = parse_config_text(R"({
    "name": "rt", "seed": 42,
    "deployment": {"ap_grid": [2, 2], "ap_spacing": 40, "n_uavs": 2, "n_users": 40,
                   "cluster_centers": [[30, 30], [50, 45]]},
    "channel": {"p_uav_dbm": 40, "noise_dbm": -90},
    "time": {"reschedules_per_frame": 14},
    "agent": {"conv_channels": [8, 8], "requester_map": "current", "gamma": 0.5},
    "sweep": {"axis": "n_users", "values": [20, 40], "policies": ["cf"]}
  })");
  CHECK(c.sim.deployment.cluster_centers->size() == 2);
  CHECK(c.agent.requester_map == agents::RequesterMode::Current);
  const auto again = parse_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(again.sim.channel.p_uav == doctest::Approx(c.sim.channel.p_uav).epsilon(1e-12));
}

TEST_CASE("sweep axes") {
  const SimConfig base;
  CHECK(apply_sweep_value(base, "n_users", 60).deployment.n_users == 60);
  CHECK(apply_sweep_value(base, "cluster_radius", 5).deployment.cluster_radius == 5.0);
  CHECK(apply_sweep_value(base, "n_uavs", 2).deployment.n_uavs == 2);
  // The option keeps its length when the slot count changes.
  const auto s = apply_sweep_value(base, "slots", 5);
  CHECK(s.time.slots_per_reschedule == 5);
  CHECK(s.slot_seconds() * 5 == doctest::Approx(base.slot_seconds() * 10));
  CHECK_THROWS_AS(apply_sweep_value(base, "weather", 1), ConfigError);
  CHECK_THROWS_AS(apply_sweep_value(base, "n_users", 2.5), ConfigError);
}

}
