#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfmb/agents/learners.hpp"
#include "cfmb/engine.hpp"

namespace cfmb {

struct TrainSection {
  std::size_t epochs = 1000;
  std::size_t eval_interval = 100;
  std::size_t eval_episodes = 20;
};

struct EvaluateSection {
  std::size_t episodes = 100;
};

struct SweepSection {
  std::string axis = "cluster_radius";
  std::vector<double> values{5.0, 10.0, 20.0, 40.0};
  std::vector<std::string> policies{"cb", "cf"};
  std::size_t episodes = 200;
};

struct ExperimentConfig {
  std::string name = "default";
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  SimConfig sim;
  agents::AgentConfig agent;
  TrainSection train;
  EvaluateSection evaluate;
  SweepSection sweep;

  void validate() const;
};

/// Parses a config document; absent keys keep their defaults, unknown keys
/// and invalid values raise ConfigError naming the key path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full document with every effective value (channel powers in dB units).
nlohmann::json to_json(const ExperimentConfig& cfg);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

/// Axes accepted by apply_sweep_value.
const std::vector<std::string>& sweep_axes();

/// Copy of `base` with one sweep axis set. The "slots" axis keeps the
/// re-scheduling period fixed by shrinking the slot length in proportion.
SimConfig apply_sweep_value(const SimConfig& base, const std::string& axis, double value);

}  // namespace cfmb
