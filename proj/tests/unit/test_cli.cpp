#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfmb/commands.hpp"
#include "cfmb/errors.hpp"
#include "cfmb/metrics.hpp"

using namespace cfmb;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ExperimentConfig small_experiment() {
  auto c = parse_config_text(R"({
    "name": "unit", "seed": 3,
    "deployment": {"ap_grid": [2, 2], "ap_spacing": 40, "n_uavs": 2, "n_users": 20},
    "time": {"reschedules_per_frame": 4, "slots_per_reschedule": 5},
    "agent": {"conv_channels": [4], "hidden": 16, "stream_hidden": 16, "scheduler_conv": [4],
              "scheduler_hidden": 16, "batch_size": 8, "learn_start": 16, "replay_capacity": 200},
    "train": {"eval_interval": 2, "eval_episodes": 2}
  })");
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("cfmb_unit_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<json> lines(const fs::path& p) {
  std::vector<json> out;
  std::ifstream is(p);
  for (std::string l; std::getline(is, l);)
    if (!l.empty()) out.push_back(json::parse(l));
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes consistent, reproducible records") {
  const auto cfg = small_experiment();
  const auto a = fresh_dir("sim_a"), b = fresh_dir("sim_b");
  SimulateArgs args;
  args.association = "cb";
  args.episodes = 6;
  const auto s = cmd_simulate(cfg, args, a);
  cmd_simulate(cfg, args, b, 3);
  for (const char* f : {"config.json", "metrics.jsonl", "summary.json", "timing.jsonl"}) CHECK(fs::exists(a / f));
  CHECK(slurp(a / "metrics.jsonl") == slurp(b / "metrics.jsonl"));

  const auto recs = lines(a / "metrics.jsonl");
  REQUIRE(recs.size() == 7);
  double sum = 0.0;
  for (const auto& r : recs) {
    CHECK(check_record(r) == "");
    if (r["kind"] == "episode") sum += r["score"].get<double>();
  }
  CHECK(recs.back()["kind"] == "summary");
  CHECK(sum / 6.0 == doctest::Approx(s.mean));
  CHECK(json::parse(slurp(a / "summary.json"))["mean"].get<double>() == doctest::Approx(s.mean));
  for (const auto& r : lines(a / "timing.jsonl")) CHECK(check_record(r) == "");
  CHECK(to_json(load_config(a / "config.json")) == to_json(cfg));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("simulate under forced success scores the ceiling") {
  auto cfg = small_experiment();
  cfg.sim.engine.force_success = true;
  cfg.sim.time.reschedules_per_frame = 28;
  cfg.sim.time.slots_per_reschedule = 10;
  const auto d = fresh_dir("sim_forced");
  SimulateArgs args;
  args.episodes = 3;
  CHECK(cmd_simulate(cfg, args, d).mean == doctest::Approx(5.0));
  fs::remove_all(d);
}

TEST_CASE("train with zero epochs keeps only the initial model") {
  const auto cfg = small_experiment();
  const auto d = fresh_dir("train0");
  TrainArgs args;
  args.agent = "distributed_nofl";
  const auto r = cmd_train(cfg, args, d);
  CHECK(r.result.curve.empty());
  CHECK(r.fedavg_calls == 0);
  CHECK(fs::exists(d / "checkpoints" / "initial"));
  CHECK_FALSE(fs::exists(d / "checkpoints" / "latest"));
  CHECK(lines(d / "curve.jsonl").empty());
  fs::remove_all(d);
}

TEST_CASE("train writes one curve point per evaluation interval") {
  const auto cfg = small_experiment();
  const auto d = fresh_dir("train4");
  TrainArgs args;
  args.agent = "hierarchical";
  args.epochs = 4;
  const auto r = cmd_train(cfg, args, d);
  const auto curve = lines(d / "curve.jsonl");
  CHECK(curve.size() == 2);
  CHECK(r.result.curve.size() == 2);
  for (const auto& p : curve) CHECK(check_record(p) == "");
  CHECK(r.fedavg_calls > 0);
  CHECK(fs::exists(d / "checkpoints" / "best"));
  CHECK(fs::exists(d / "checkpoints" / "latest"));

  // The best checkpoint evaluates through the policy factory.
  const auto e = fresh_dir("eval_ckpt");
  EvaluateArgs ea;
  ea.policy = "hierarchical";
  ea.checkpoint = d / "checkpoints" / "best";
  ea.episodes = 2;
  const auto s = cmd_evaluate(cfg, ea, e);
  CHECK(s.mean >= 0.0);
  CHECK(s.mean <= 5.0);
  fs::remove_all(d);
  fs::remove_all(e);
}

TEST_CASE("sweep writes one cell per value and policy") {
  const auto cfg = small_experiment();
  const auto d = fresh_dir("sweep");
  SweepArgs args;
  args.axis = "n_users";
  args.values = {10, 20, 30};
  args.policies = {"cb", "cf"};
  args.episodes = 2;
  const auto cells = cmd_sweep(cfg, args, d);
  CHECK(cells.size() == 6);
  CHECK(lines(d / "cells.jsonl").size() == 6);
  const auto metrics = lines(d / "metrics.jsonl");
  CHECK(metrics.size() == 12);
  for (const auto& r : metrics) CHECK(check_record(r) == "");
  std::ifstream table(d / "table.tsv");
  std::size_t rows = 0;
  for (std::string l; std::getline(table, l);) ++rows;
  CHECK(rows == 7);
  fs::remove_all(d);
}

TEST_CASE("export records one line per AP and slot") {
  const auto cfg = small_experiment();
  const auto d = fresh_dir("export");
  ExportArgs args;
  const auto n = cmd_export(cfg, args, d);
  CHECK(n == 4 * cfg.sim.time.slots_per_gop());
  const auto recs = lines(d / "export.jsonl");
  CHECK(recs.size() == n);
  CHECK(check_record(recs.front()) == "");
  fs::remove_all(d);
}

TEST_CASE("policy names") {
  const auto cfg = small_experiment();
  CHECK(make_policy("cb", cfg).name() == "ppf+cb");
  CHECK(make_policy("distributed", cfg).name() == "ppf+distributed");
  CHECK(make_policy("hierarchical", cfg).name() == "learned+distributed");
  CHECK_THROWS_AS(make_policy("cf@/tmp", cfg), ConfigError);
  try {
    make_policy("oracle", cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("oracle") != std::string::npos);
    CHECK(msg.find("cb, cf, centralized") != std::string::npos);
  }
}

TEST_CASE("malformed records are reported") {
  CHECK(check_record(json::array()) != "");
  CHECK(check_record({{"schema_version", 1}, {"kind", "episode"}, {"experiment", "x"}}) != "");
  CHECK(check_record({{"schema_version", 2}, {"kind", "summary"}, {"experiment", "x"}}) != "");
  CHECK(check_record({{"schema_version", 1}, {"kind", "bogus"}, {"experiment", "x"}}) != "");
}

}
