#include "cfmb/commands.hpp"

#include <chrono>
#include <fstream>

#include "cfmb/agents/baselines.hpp"
#include "cfmb/agents/learners.hpp"
#include "cfmb/errors.hpp"
#include "cfmb/metrics.hpp"

namespace cfmb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void prepare_output(const ExperimentConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  save_config(out / "config.json", cfg);
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << doc.dump(2) << '\n';
}

void write_episodes(JsonlWriter& w, const std::string& experiment, const json& point, const EvalSummary& s,
                    std::uint64_t base_seed) {
  for (std::size_t i = 0; i < s.episodes.size(); ++i)
    w.write(episode_record(experiment, point, i, episode_seed(base_seed, i), s.episodes[i]));
}

bool is_baseline(const std::string& name) { return name == "cb" || name == "cf"; }

}  // namespace

PolicyBundle make_policy(const std::string& spec, const ExperimentConfig& cfg, const std::optional<fs::path>& checkpoint) {
  std::string name = spec;
  std::optional<fs::path> dir = checkpoint;
  if (const auto at = spec.find('@'); at != std::string::npos) {
    name = spec.substr(0, at);
    dir = fs::path(spec.substr(at + 1));
  }
  if (is_baseline(name)) {
    if (dir) throw ConfigError("policy '" + name + "' has no checkpoint");
    return {agents::make_baseline_scheduler("ppf"), agents::make_baseline_association(name)};
  }
  const auto& names = agents::agent_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string opts = "cb, cf";
    for (const auto& n : names) opts += ", " + n;
    throw ConfigError("unknown policy '" + name + "' (options: " + opts + ")");
  }
  PolicyBundle b = agents::make_agent_bundle(name, cfg.sim, cfg.agent, cfg.seed);
  if (dir) agents::load_bundle(b, *dir);
  b.scheduler->set_training(false);
  b.associator->set_training(false);
  return b;
}

EvalSummary cmd_simulate(const ExperimentConfig& cfg, const SimulateArgs& args, const fs::path& out, std::size_t workers) {
  PolicyBundle b{agents::make_baseline_scheduler(args.scheduler), agents::make_baseline_association(args.association)};
  prepare_output(cfg, out);
  Stopwatch sw;
  const auto s = evaluate(cfg.sim, b, args.episodes, cfg.seed, workers, true);
  const json point = {{"command", "simulate"}, {"policy", b.name()}};
  JsonlWriter w(out / "metrics.jsonl");
  write_episodes(w, cfg.name, point, s, cfg.seed);
  w.write(summary_record(cfg.name, point, b.name(), s));
  write_json(out / "summary.json", {{"policy", b.name()}, {"episodes", args.episodes}, {"mean", s.mean}, {"sd", s.sd}});
  JsonlWriter(out / "timing.jsonl").write(timing_record(cfg.name, "simulate", sw.seconds()));
  return s;
}

TrainReport cmd_train(const ExperimentConfig& cfg, const TrainArgs& args, const fs::path& out, std::size_t workers) {
  PolicyBundle b = agents::make_agent_bundle(args.agent, cfg.sim, cfg.agent, cfg.seed);
  prepare_output(cfg, out);
  Stopwatch sw;
  agents::TrainOptions opts;
  opts.epochs = args.epochs;
  opts.eval_interval = cfg.train.eval_interval;
  opts.eval_episodes = cfg.train.eval_episodes;
  opts.seed = cfg.seed;
  opts.workers = workers;
  opts.checkpoint_dir = out / "checkpoints";
  JsonlWriter curve(out / "curve.jsonl");
  JsonlWriter timing(out / "timing.jsonl");
  TrainReport rep;
  rep.result = agents::train_policy(cfg.sim, b, opts, [&](const agents::CurvePoint& p) {
    curve.write({{"schema_version", kMetricsSchemaVersion},
                 {"kind", "curve"},
                 {"experiment", cfg.name},
                 {"agent", args.agent},
                 {"epoch", p.epoch},
                 {"mean", p.mean},
                 {"sd", p.sd},
                 {"train_mean", p.train_mean}});
    timing.write(timing_record(cfg.name, "epoch " + std::to_string(p.epoch), sw.seconds()));
  });
  if (auto* d = dynamic_cast<const agents::DistributedAssociation*>(b.associator.get())) rep.fedavg_calls = d->fedavg_calls();
  write_json(out / "summary.json", {{"agent", args.agent},
                                    {"epochs", args.epochs},
                                    {"curve_points", rep.result.curve.size()},
                                    {"best_epoch", rep.result.best_epoch},
                                    {"best_mean", rep.result.best_mean},
                                    {"fedavg_calls", rep.fedavg_calls}});
  timing.write(timing_record(cfg.name, "train", sw.seconds()));
  return rep;
}

EvalSummary cmd_evaluate(const ExperimentConfig& cfg, const EvaluateArgs& args, const fs::path& out, std::size_t workers) {
  PolicyBundle b = make_policy(args.policy, cfg, args.checkpoint);
  prepare_output(cfg, out);
  Stopwatch sw;
  const auto s = evaluate(cfg.sim, b, args.episodes, cfg.seed, workers, true);
  const json point = {{"command", "evaluate"}, {"policy", args.policy}};
  JsonlWriter w(out / "metrics.jsonl");
  write_episodes(w, cfg.name, point, s, cfg.seed);
  w.write(summary_record(cfg.name, point, args.policy, s));
  write_json(out / "summary.json", {{"policy", args.policy}, {"episodes", args.episodes}, {"mean", s.mean}, {"sd", s.sd}});
  JsonlWriter(out / "timing.jsonl").write(timing_record(cfg.name, "evaluate", sw.seconds()));
  return s;
}

std::vector<SweepCell> cmd_sweep(const ExperimentConfig& cfg, const SweepArgs& args, const fs::path& out,
                                 std::size_t workers) {
  if (args.values.empty()) throw ConfigError("sweep.values: must not be empty");
  if (args.policies.empty()) throw ConfigError("sweep.policies: must not be empty");
  prepare_output(cfg, out);
  JsonlWriter w(out / "metrics.jsonl");
  JsonlWriter cells(out / "cells.jsonl");
  JsonlWriter timing(out / "timing.jsonl");
  std::ofstream table(out / "table.tsv");
  table << args.axis << "\tpolicy\tmean\tsd\tepisodes\n";
  std::vector<SweepCell> result;
  for (double v : args.values) {
    ExperimentConfig point_cfg = cfg;
    point_cfg.sim = apply_sweep_value(cfg.sim, args.axis, v);
    for (const auto& p : args.policies) {
      Stopwatch sw;
      PolicyBundle b = make_policy(p, point_cfg);
      const auto s = evaluate(point_cfg.sim, b, args.episodes, cfg.seed, workers, true);
      const json point = {{"command", "sweep"}, {"axis", args.axis}, {"value", v}, {"policy", p}};
      write_episodes(w, cfg.name, point, s, cfg.seed);
      auto rec = summary_record(cfg.name, point, p, s);
      rec["kind"] = "cell";
      cells.write(rec);
      table << json(v).dump() << '\t' << p << '\t' << json(s.mean).dump() << '\t' << json(s.sd).dump() << '\t'
            << args.episodes << '\n';
      timing.write(timing_record(cfg.name, args.axis + "=" + json(v).dump() + " " + p, sw.seconds()));
      result.push_back({v, p, s.mean, s.sd});
    }
  }
  return result;
}

std::size_t cmd_export(const ExperimentConfig& cfg, const ExportArgs& args, const fs::path& out) {
  PolicyBundle b = make_policy(args.agent, cfg, args.checkpoint);
  auto* d = dynamic_cast<agents::DistributedAssociation*>(b.associator.get());
  if (!d) throw ConfigError("export: agent '" + args.agent + "' has no distributed association agents");
  prepare_output(cfg, out);
  JsonlWriter w(out / "export.jsonl");
  std::size_t n = 0;
  d->set_export_sink([&](const agents::ExportRecord& r) {
    w.write({{"schema_version", kMetricsSchemaVersion},
             {"kind", "export"},
             {"experiment", cfg.name},
             {"episode_seed", r.episode_seed},
             {"global_slot", r.global_slot},
             {"ap", r.ap},
             {"action", r.action},
             {"observation", r.observation},
             {"hidden", r.hidden}});
    ++n;
  });
  for (std::size_t i = 0; i < args.episodes; ++i)
    run_gop_episode(cfg.sim, *b.scheduler, *b.associator, episode_seed(cfg.seed, i));
  return n;
}

}  // namespace cfmb
