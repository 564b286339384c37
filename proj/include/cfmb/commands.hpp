#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfmb/agents/training.hpp"
#include "cfmb/config.hpp"

namespace cfmb {

/// Builds a policy from a name: "cb" / "cf" (P-PF scheduling), an agent
/// name, or "<agent>@<checkpoint dir>" to load trained parameters.
PolicyBundle make_policy(const std::string& spec, const ExperimentConfig& cfg,
                         const std::optional<std::filesystem::path>& checkpoint = {});

struct SimulateArgs {
  std::string scheduler = "ppf";
  std::string association = "cf";
  std::size_t episodes = 100;
};
EvalSummary cmd_simulate(const ExperimentConfig& cfg, const SimulateArgs& args, const std::filesystem::path& out,
                         std::size_t workers = 1);

struct TrainArgs {
  std::string agent = "distributed";
  std::size_t epochs = 0;
};
struct TrainReport {
  agents::TrainResult result;
  std::size_t fedavg_calls = 0;
};
TrainReport cmd_train(const ExperimentConfig& cfg, const TrainArgs& args, const std::filesystem::path& out,
                      std::size_t workers = 1);

struct EvaluateArgs {
  std::string policy = "cf";
  std::optional<std::filesystem::path> checkpoint;
  std::size_t episodes = 100;
};
EvalSummary cmd_evaluate(const ExperimentConfig& cfg, const EvaluateArgs& args, const std::filesystem::path& out,
                         std::size_t workers = 1);

struct SweepArgs {
  std::string axis;
  std::vector<double> values;
  std::vector<std::string> policies;
  std::size_t episodes = 200;
};
struct SweepCell {
  double value = 0.0;
  std::string policy;
  double mean = 0.0;
  double sd = 0.0;
};
std::vector<SweepCell> cmd_sweep(const ExperimentConfig& cfg, const SweepArgs& args, const std::filesystem::path& out,
                                 std::size_t workers = 1);

struct ExportArgs {
  std::string agent = "distributed";
  std::optional<std::filesystem::path> checkpoint;
  std::size_t episodes = 1;
};
std::size_t cmd_export(const ExperimentConfig& cfg, const ExportArgs& args, const std::filesystem::path& out);

}  // namespace cfmb
