#include "cfmb/agents/training.hpp"

#include "cfmb/agents/learners.hpp"

namespace cfmb::agents {

std::uint64_t training_seed(std::uint64_t base, std::size_t epoch) { return derive_seed(base, {0x7a, epoch}); }
std::uint64_t validation_seed(std::uint64_t base) { return derive_seed(base, {0x7b}); }

TrainResult train_policy(const SimConfig& cfg, PolicyBundle& policy, const TrainOptions& opts,
                         const CurveSink& on_point) {
  TrainResult res;
  res.best = policy.clone();
  if (opts.checkpoint_dir) {
    save_bundle(policy, *opts.checkpoint_dir / "initial");
    save_bundle(policy, *opts.checkpoint_dir / "best");
  }
  bool have_best = false;
  double since_sum = 0.0;
  std::size_t since_n = 0;

  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    policy.scheduler->set_training(true);
    policy.associator->set_training(true);
    const auto ep = run_gop_episode(cfg, *policy.scheduler, *policy.associator, training_seed(opts.seed, epoch));
    res.train_scores.push_back(ep.score);
    since_sum += ep.score;
    ++since_n;

    if (opts.eval_interval > 0 && epoch % opts.eval_interval == 0) {
      policy.scheduler->set_training(false);
      policy.associator->set_training(false);
      const auto ev = evaluate(cfg, policy, opts.eval_episodes, validation_seed(opts.seed), opts.workers);
      CurvePoint pt{epoch, ev.mean, ev.sd, since_sum / static_cast<double>(since_n)};
      since_sum = 0.0;
      since_n = 0;
      res.curve.push_back(pt);
      if (on_point) on_point(pt);
      if (!have_best || ev.mean > res.best_mean) {
        have_best = true;
        res.best_mean = ev.mean;
        res.best_epoch = epoch;
        res.best = policy.clone();
        if (opts.checkpoint_dir) save_bundle(policy, *opts.checkpoint_dir / "best");
      }
      if (opts.checkpoint_dir) save_bundle(policy, *opts.checkpoint_dir / "latest");
    }
  }
  policy.scheduler->set_training(false);
  policy.associator->set_training(false);
  res.best.scheduler->set_training(false);
  res.best.associator->set_training(false);
  return res;
}

}  // namespace cfmb::agents
