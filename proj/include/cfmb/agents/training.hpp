#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "cfmb/engine.hpp"

namespace cfmb::agents {

struct TrainOptions {
  std::size_t epochs = 0;           // one epoch = one training GOP episode
  std::size_t eval_interval = 100;  // epochs between evaluations
  std::size_t eval_episodes = 20;
  std::uint64_t seed = 0;
  std::size_t workers = 1;          // evaluation threads
  std::optional<std::filesystem::path> checkpoint_dir;
};

struct CurvePoint {
  std::size_t epoch = 0;
  double mean = 0.0;
  double sd = 0.0;
  double train_mean = 0.0;  // mean training-episode score since the previous point
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  std::vector<double> train_scores;
  std::size_t best_epoch = 0;
  double best_mean = 0.0;
  PolicyBundle best;  // clone of the best-evaluated policy (initial when never evaluated)
};

using CurveSink = std::function<void(const CurvePoint&)>;

/// Seed of training episode `epoch`.
std::uint64_t training_seed(std::uint64_t base, std::size_t epoch);
/// Base seed of the validation episodes used for model selection.
std::uint64_t validation_seed(std::uint64_t base);

/// Trains `policy` in place for `opts.epochs` episodes. Every eval_interval
/// epochs a frozen clone is evaluated on the validation seeds and the best
/// one is kept (and written to checkpoint_dir/best when given).
TrainResult train_policy(const SimConfig& cfg, PolicyBundle& policy, const TrainOptions& opts,
                         const CurveSink& on_point = {});

}  // namespace cfmb::agents
