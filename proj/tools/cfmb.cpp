#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfmb/commands.hpp"
#include "cfmb/errors.hpp"
#include "cfmb/metrics.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config (JSON); omitted means defaults");
  cmd->add_option("--seed", c.seed, "Base seed (overrides the config)");
  cmd->add_option("--out", c.out, "Output directory (overrides the config)");
  cmd->add_option("--workers", c.workers, "Evaluation threads (default: CFMB_WORKERS or 1)");
}

cfmb::ExperimentConfig resolve(const Common& c, std::string& out, std::size_t& workers) {
  auto cfg = c.config.empty() ? cfmb::parse_config(nlohmann::json::object()) : cfmb::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  out = cfg.output_dir;
  workers = c.workers ? *c.workers : cfmb::default_workers();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  cfmb::tune_allocator();
  CLI::App app{"Cell-free multi-group broadcast simulator and learning agents"};
  app.require_subcommand(1);

  Common sim_c, train_c, eval_c, sweep_c, export_c;
  cfmb::SimulateArgs sim_a;
  std::optional<std::size_t> sim_episodes;
  auto* sim = app.add_subcommand("simulate", "Evaluate the P-PF scheduler with a baseline association");
  add_common(sim, sim_c);
  sim->add_option("--scheduler", sim_a.scheduler, "Scheduler (ppf)");
  sim->add_option("--association", sim_a.association, "Association (cb, cf)");
  sim->add_option("--episodes", sim_episodes, "Episodes (default: evaluate.episodes)");

  cfmb::TrainArgs train_a;
  std::optional<std::size_t> train_epochs;
  auto* train = app.add_subcommand("train", "Train a learning agent");
  add_common(train, train_c);
  train->add_option("--agent", train_a.agent, "centralized, distributed, distributed_nofl, hierarchical, hierarchical_nofl");
  train->add_option("--epochs", train_epochs, "Training episodes (default: train.epochs)");

  cfmb::EvaluateArgs eval_a;
  std::string eval_ckpt;
  std::optional<std::size_t> eval_episodes;
  auto* eval = app.add_subcommand("evaluate", "Evaluate a baseline or a checkpoint");
  add_common(eval, eval_c);
  eval->add_option("--policy", eval_a.policy, "cb, cf or an agent name");
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint directory of the agent");
  eval->add_option("--episodes", eval_episodes, "Episodes (default: evaluate.episodes)");

  cfmb::SweepArgs sweep_a;
  std::optional<std::string> sweep_axis;
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_policies;
  std::optional<std::size_t> sweep_episodes;
  auto* sweep = app.add_subcommand("sweep", "Evaluate policies along one parameter axis");
  add_common(sweep, sweep_c);
  sweep->add_option("--axis", sweep_axis, "n_users, cluster_radius, slots, n_uavs");
  sweep->add_option("--values", sweep_values, "Axis values");
  sweep->add_option("--policies", sweep_policies, "Policies (cb, cf, <agent>@<checkpoint>)");
  sweep->add_option("--episodes", sweep_episodes, "Episodes per cell (default: sweep.episodes)");

  cfmb::ExportArgs export_a;
  std::string export_ckpt;
  auto* exp = app.add_subcommand("export", "Dump per-step local observations, hidden vectors and actions");
  add_common(exp, export_c);
  exp->add_option("--agent", export_a.agent, "distributed, distributed_nofl, hierarchical, hierarchical_nofl");
  exp->add_option("--checkpoint", export_ckpt, "Checkpoint directory of the agent");
  exp->add_option("--episodes", export_a.episodes, "Episodes to record");

  CLI11_PARSE(app, argc, argv);

  try {
    std::string out;
    std::size_t workers = 1;
    if (*sim) {
      auto cfg = resolve(sim_c, out, workers);
      sim_a.episodes = sim_episodes.value_or(cfg.evaluate.episodes);
      const auto s = cfmb::cmd_simulate(cfg, sim_a, out, workers);
      std::printf("%s+%s: mean %.4f sd %.4f over %zu episodes\n", sim_a.scheduler.c_str(), sim_a.association.c_str(),
                  s.mean, s.sd, sim_a.episodes);
    } else if (*train) {
      auto cfg = resolve(train_c, out, workers);
      train_a.epochs = train_epochs.value_or(cfg.train.epochs);
      const auto r = cfmb::cmd_train(cfg, train_a, out, workers);
      std::printf("%s: %zu epochs, best validation mean %.4f at epoch %zu, fedavg calls %zu\n", train_a.agent.c_str(),
                  train_a.epochs, r.result.best_mean, r.result.best_epoch, r.fedavg_calls);
    } else if (*eval) {
      auto cfg = resolve(eval_c, out, workers);
      if (!eval_ckpt.empty()) eval_a.checkpoint = eval_ckpt;
      eval_a.episodes = eval_episodes.value_or(cfg.evaluate.episodes);
      const auto s = cfmb::cmd_evaluate(cfg, eval_a, out, workers);
      std::printf("%s: mean %.4f sd %.4f over %zu episodes\n", eval_a.policy.c_str(), s.mean, s.sd, eval_a.episodes);
    } else if (*sweep) {
      auto cfg = resolve(sweep_c, out, workers);
      sweep_a.axis = sweep_axis.value_or(cfg.sweep.axis);
      sweep_a.values = sweep_values.empty() ? cfg.sweep.values : sweep_values;
      sweep_a.policies = sweep_policies.empty() ? cfg.sweep.policies : sweep_policies;
      sweep_a.episodes = sweep_episodes.value_or(cfg.sweep.episodes);
      for (const auto& c : cfmb::cmd_sweep(cfg, sweep_a, out, workers))
        std::printf("%s=%g %s: mean %.4f sd %.4f\n", sweep_a.axis.c_str(), c.value, c.policy.c_str(), c.mean, c.sd);
    } else if (*exp) {
      auto cfg = resolve(export_c, out, workers);
      if (!export_ckpt.empty()) export_a.checkpoint = export_ckpt;
      const auto n = cfmb::cmd_export(cfg, export_a, out);
      std::printf("exported %zu records\n", n);
    }
  } catch (const cfmb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
