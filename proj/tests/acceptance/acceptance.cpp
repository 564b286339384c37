// Acceptance checks. Each criterion prints its measurements followed by one
// "criterion N: PASS|FAIL" line; the exit code is non-zero on FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfmb/agents/baselines.hpp"
#include "cfmb/agents/learners.hpp"
#include "cfmb/agents/observation.hpp"
#include "cfmb/agents/training.hpp"
#include "cfmb/channel.hpp"
#include "cfmb/commands.hpp"
#include "cfmb/config.hpp"
#include "cfmb/metrics.hpp"
#include "cfmb/rl/distributional.hpp"
#include "cfmb/rl/network.hpp"
#include "cfmb/rl/params.hpp"
#include "cfmb/video.hpp"

using namespace cfmb;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string reduced_config;
  std::string work_dir = "acceptance_work";
  std::size_t trend_episodes = 200;
  std::size_t epochs = 300;
  std::size_t seeds = 5;
  std::size_t heldout = 500;
  std::size_t workers = 1;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void note(const char* fmt, auto... args) {
  std::printf("  ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

int verdict(int n, bool pass, double seconds) {
  std::printf("criterion %d: %s (%.1f s)\n", n, pass ? "PASS" : "FAIL", seconds);
  std::fflush(stdout);
  return pass ? 0 : 1;
}

// (max - min) / max over a set of means.
double spread(const std::vector<double>& x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
}

PolicyBundle baseline(const std::string& assoc) {
  return {std::make_unique<agents::PpfScheduler>(), agents::make_baseline_association(assoc)};
}

std::vector<TileId> tiles_of(std::size_t uav, std::size_t first, std::size_t count) {
  std::vector<TileId> t;
  for (std::size_t i = first; i < first + count; ++i) t.push_back({uav, i / kTileCols, i % kTileCols});
  return t;
}

// Two users with 2 and 3 pending tiles share a grid cell; a third with 8 sits alone.
double normalization_example() {
  SimConfig sim;
  sim.deployment.ap_grid = {2, 2};
  sim.deployment.ap_spacing = 40.0;
  sim.deployment.n_uavs = 1;
  sim.deployment.n_users = 3;
  auto s = make_episode(sim, 1);
  s.deployment.users = {{{25, 25, 0}, 0}, {{26, 27, 0}, 0}, {{65, 65, 0}, 0}};
  s.requests = std::make_shared<RequestSet>(
      std::vector<std::vector<TileId>>{tiles_of(0, 0, 2), tiles_of(0, 10, 3), tiles_of(0, 20, 8)}, 1);
  s.decode = DecodeState(s.requests);
  s.schedule.tiles = {tiles_of(0, 0, 2)};
  for (const auto& t : tiles_of(0, 10, 3)) s.schedule.tiles[0].push_back(t);
  for (const auto& t : tiles_of(0, 20, 8)) s.schedule.tiles[0].push_back(t);
  const agents::ObservationSpec spec;
  const auto obs = agents::build_global_observation(s, spec);
  const auto g = agents::global_frame(s, spec);
  const auto rc = *g.locate(s.deployment.users[0].pos);
  return obs[2 * g.side * g.side + rc.first * g.side + rc.second];
}

int criterion1() {
  Clock clock;
  const double los = los_probability(11.95);
  const double cap = vpsnr(35, 35);
  const double norm = normalization_example();
  note("los_probability(11.95) = %.9f (target 0.077220 +- 1e-6)", los);
  note("V-PSNR(35 of 35) = %.6f dB (target 30.881 +- 1e-3)", cap);
  note("normalized requester cell = %.17g (target 0.625 exactly)", norm);
  const double t = clock.seconds();
  const bool pass = std::abs(los - 0.077220) <= 1e-6 && std::abs(cap - 30.881) <= 1e-3 && norm == 0.625 && t < 1.0;
  return verdict(1, pass, t);
}

std::vector<double> random_probs(Rng& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) s += (x = e(rng));
  for (auto& x : p) x /= s;
  return p;
}

int criterion2() {
  Clock clock;
  Rng rng(2024);

  double worst_mass = 0.0;
  {
    std::uniform_real_distribution<double> r(-40.0, 70.0), g(0.0, 1.0);
    const rl::Support s(0.0, 30.881, 21);
    for (int t = 0; t < 100000; ++t) {
      const auto p = random_probs(rng, 21);
      const auto m = rl::categorical_project(r(rng), g(rng), p, s);
      worst_mass = std::max(worst_mass, std::abs(std::accumulate(m.begin(), m.end(), 0.0) - 1.0));
    }
  }
  note("projection: worst |mass - 1| over 1e5 cases = %.3g (limit 1e-6)", worst_mass);

  rl::NetConfig cfg;
  cfg.in_channels = 3;
  cfg.height = 5;
  cfg.width = 5;
  cfg.conv_channels = {4, 3};
  cfg.hidden = 8;
  cfg.stream_hidden = 6;
  cfg.n_actions = 3;
  cfg.n_atoms = 11;
  cfg.dropout = 0.0;
  rl::RainbowNet net(cfg, rng);
  net.sample_noise(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> obs(4, std::vector<double>(cfg.obs_size()));
  for (auto& o : obs)
    for (auto& x : o) x = u(rng);
  const auto x = rl::pack_observations({&obs[0], &obs[1], &obs[2], &obs[3]}, cfg.in_channels, cfg.height * cfg.width);
  const std::vector<std::vector<std::uint32_t>> actions{{0}, {1}, {2}, {0, 2}};
  std::vector<std::vector<double>> targets;
  for (int b = 0; b < 4; ++b) targets.push_back(random_probs(rng, cfg.n_atoms));
  const std::vector<double> weights{1.0, 0.7, 0.4, 0.9};
  auto grads = net.params().zeros_like();
  rl::distributional_loss(net, x, actions, targets, weights, &grads);
  const double h = 1e-6;
  double worst_grad = 0.0;
  for (std::size_t i = 0; i < net.params().count(); ++i) {
    auto& vals = net.params().tensor(i).values;
    for (std::size_t j = 0; j < vals.size(); ++j) {
      const double keep = vals[j];
      vals[j] = keep + h;
      const double up = rl::distributional_loss(net, x, actions, targets, weights);
      vals[j] = keep - h;
      const double down = rl::distributional_loss(net, x, actions, targets, weights);
      vals[j] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grads.tensor(i).values[j];
      worst_grad = std::max(worst_grad,
                            std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
    }
  }
  note("gradient: worst relative error over %zu parameters = %.3g (limit 1e-4)", net.params().total_size(), worst_grad);

  double worst_avg = 0.0;
  for (std::size_t k : {1, 2, 3, 9}) {
    const std::vector<rl::AgentParams> same(k, net.params());
    worst_avg = std::max(worst_avg, rl::max_abs_diff(rl::fedavg(same), net.params()));
  }
  note("FedAvg of identical sets: max |avg - p| = %.3g", worst_avg);

  const double t = clock.seconds();
  const bool pass = worst_mass <= 1e-6 && worst_grad <= 1e-4 && worst_avg <= 1e-15 && t < 60.0;
  return verdict(2, pass, t);
}

std::vector<double> sweep_means(const SimConfig& base, const std::string& axis, const std::vector<double>& values,
                                const std::string& assoc, const Options& o) {
  std::vector<double> m;
  for (double v : values) {
    const auto s = evaluate(apply_sweep_value(base, axis, v), baseline(assoc), o.trend_episodes, 1, o.workers);
    note("%s=%g %s: mean %.4f sd %.4f (%zu episodes)", axis.c_str(), v, assoc.c_str(), s.mean, s.sd,
         o.trend_episodes);
    m.push_back(s.mean);
  }
  return m;
}

int criterion3(const Options& o) {
  Clock clock;
  const SimConfig base;
  const std::vector<double> radii{5, 10, 20, 40};
  const auto cb = sweep_means(base, "cluster_radius", radii, "cb", o);
  const auto cf = sweep_means(base, "cluster_radius", radii, "cf", o);
  bool monotone = true;
  for (std::size_t i = 1; i < cb.size(); ++i) monotone = monotone && cb[i] <= cb[i - 1];
  const double drop = (cb.front() - cb.back()) / cb.front();
  note("CB non-increasing: %s; total drop %.1f%% (need >= 10%%)", monotone ? "yes" : "no", 100.0 * drop);
  note("CF spread (max-min)/max = %.2f%% (limit 5%%)", 100.0 * spread(cf));
  const double t = clock.seconds();
  return verdict(3, monotone && drop >= 0.10 && spread(cf) <= 0.05 && t <= 1800.0, t);
}

int criterion4(const Options& o) {
  Clock clock;
  const SimConfig base;
  const std::vector<double> users{40, 80, 120};
  const auto cb = sweep_means(base, "n_users", users, "cb", o);
  const auto cf = sweep_means(base, "n_users", users, "cf", o);
  note("CB spread (max-min)/max = %.2f%% (limit 10%%)", 100.0 * spread(cb));
  note("CF spread (max-min)/max = %.2f%% (limit 10%%)", 100.0 * spread(cf));
  const double t = clock.seconds();
  return verdict(4, spread(cb) <= 0.10 && spread(cf) <= 0.10 && t <= 1800.0, t);
}

int criterion5(const Options& o) {
  Clock clock;
  const SimConfig base;
  const std::vector<double> slots{5, 20};
  const auto cb = sweep_means(base, "slots", slots, "cb", o);
  const auto cf = sweep_means(base, "slots", slots, "cf", o);
  note("CF strictly increases: %s; CB does not increase: %s", cf[1] > cf[0] ? "yes" : "no", cb[1] <= cb[0] ? "yes" : "no");
  const double t = clock.seconds();
  return verdict(5, cf[1] > cf[0] && cb[1] <= cb[0], t);
}

std::uint64_t heldout_seed(std::uint64_t base) { return derive_seed(base, {0x4e1d}); }

struct Trained {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t best_epoch = 0;
};

Trained train_and_test(const ExperimentConfig& cfg, const std::string& agent, std::uint64_t seed, const Options& o) {
  Clock clock;
  auto bundle = agents::make_agent_bundle(agent, cfg.sim, cfg.agent, seed);
  agents::TrainOptions opts;
  opts.epochs = o.epochs;
  opts.eval_interval = cfg.train.eval_interval;
  opts.eval_episodes = cfg.train.eval_episodes;
  opts.seed = seed;
  opts.workers = o.workers;
  const auto res = agents::train_policy(cfg.sim, bundle, opts);
  const auto s = evaluate(cfg.sim, res.best, o.heldout, heldout_seed(cfg.seed), o.workers);
  note("%s seed %llu: held-out mean %.4f sd %.4f (best epoch %zu of %zu, %.0f s)", agent.c_str(),
       static_cast<unsigned long long>(seed), s.mean, s.sd, res.best_epoch, o.epochs, clock.seconds());
  return {s.mean, s.sd, res.best_epoch};
}

double cross_seed_sd(const std::vector<double>& x) {
  double m = 0.0, sd = 0.0;
  mean_sd(x, m, sd);
  return sd;
}

int criterion6(const ExperimentConfig& cfg, const Options& o) {
  Clock clock;
  const auto cb = evaluate(cfg.sim, baseline("cb"), o.heldout, heldout_seed(cfg.seed), o.workers);
  const auto cf = evaluate(cfg.sim, baseline("cf"), o.heldout, heldout_seed(cfg.seed), o.workers);
  note("CB held-out mean %.4f sd %.4f; CF held-out mean %.4f sd %.4f (%zu episodes)", cb.mean, cb.sd, cf.mean, cf.sd,
       o.heldout);
  std::vector<double> fl, nofl;
  for (std::size_t i = 0; i < o.seeds; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, {0x5eed, i});
    fl.push_back(train_and_test(cfg, "distributed", seed, o).mean);
    nofl.push_back(train_and_test(cfg, "distributed_nofl", seed, o).mean);
  }
  const double fl_mean = std::accumulate(fl.begin(), fl.end(), 0.0) / static_cast<double>(fl.size());
  const double target = 1.05 * std::max(cb.mean, cf.mean);
  const double sd_fl = cross_seed_sd(fl), sd_nofl = cross_seed_sd(nofl);
  note("FedAvg mean over %zu seeds %.4f vs target 1.05 x max(CB, CF) = %.4f", o.seeds, fl_mean, target);
  note("cross-seed SD: FedAvg %.4f, no-FL %.4f (need no-FL strictly higher)", sd_fl, sd_nofl);
  const double t = clock.seconds();
  return verdict(6, fl_mean >= target && sd_nofl > sd_fl && o.epochs <= 10000 && o.heldout >= 500 && t <= 12 * 3600.0,
                 t);
}

// Forwards to a learned scheduler and records the global slot of every call.
class CountingScheduler final : public SchedulerPolicy {
 public:
  CountingScheduler(SchedulerPolicy& inner, std::vector<std::size_t>& calls, std::size_t& ends)
      : inner_(inner), calls_(calls), ends_(ends) {}
  std::string name() const override { return inner_.name(); }
  void begin_episode(const EpisodeState& s, std::uint64_t seed) override { inner_.begin_episode(s, seed); }
  Schedule decide(const EpisodeState& s) override {
    calls_.push_back(s.global_slot);
    return inner_.decide(s);
  }
  void option_end(const EpisodeState& s, double r, bool done) override {
    ++ends_;
    inner_.option_end(s, r, done);
  }
  std::unique_ptr<SchedulerPolicy> clone() const override { return inner_.clone(); }

 private:
  SchedulerPolicy& inner_;
  std::vector<std::size_t>& calls_;
  std::size_t& ends_;
};

int criterion7(const ExperimentConfig& cfg, const Options& o) {
  Clock clock;
  const std::uint64_t seed = derive_seed(cfg.seed, {0x5eed, 0});
  const auto dist = train_and_test(cfg, "distributed", seed, o);
  const auto hier = train_and_test(cfg, "hierarchical", seed, o);
  const bool score_ok = hier.mean >= dist.mean - dist.sd;
  note("hierarchical %.4f vs distributed %.4f - 1 SD (%.4f) = %.4f", hier.mean, dist.mean, dist.sd,
       dist.mean - dist.sd);

  auto bundle = agents::make_agent_bundle("hierarchical", cfg.sim, cfg.agent, seed);
  const std::size_t tr = cfg.sim.time.slots_per_reschedule;
  const std::size_t options = cfg.sim.time.frames_per_gop * cfg.sim.time.reschedules_per_frame;
  bool trace_ok = true;
  for (bool training : {false, true}) {
    bundle.scheduler->set_training(training);
    bundle.associator->set_training(training);
    for (std::size_t e = 0; e < 3; ++e) {
      std::vector<std::size_t> calls;
      std::size_t ends = 0, acted = 0, records = 0;
      CountingScheduler counting(*bundle.scheduler, calls, ends);
      TraceSink sink = [&](const TraceRecord& r) {
        ++records;
        if (r.scheduler_acted) {
          ++acted;
          trace_ok = trace_ok && r.slot == 0 && r.global_slot % tr == 0;
        }
      };
      const auto res = run_gop_episode(cfg.sim, counting, *bundle.associator, heldout_seed(cfg.seed) + e, &sink);
      trace_ok = trace_ok && calls.size() == options && ends == options && acted == options &&
                 res.scheduler_calls == options && records == cfg.sim.time.slots_per_gop();
      for (std::size_t i = 0; i < calls.size(); ++i) trace_ok = trace_ok && calls[i] == i * tr;
    }
  }
  note("scheduler acts exactly once per %zu slots (%zu options per GOP): %s", tr, options, trace_ok ? "yes" : "no");
  const double t = clock.seconds();
  return verdict(7, score_ok && trace_ok, t);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Every regular file except wall-clock timing logs, keyed by relative path.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "timing.jsonl")
      out.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

int criterion8(const ExperimentConfig& reduced, const Options& o) {
  Clock clock;
  ExperimentConfig cfg = reduced;
  cfg.train.eval_interval = 2;
  cfg.train.eval_episodes = 3;
  const fs::path root = fs::absolute(o.work_dir) / "determinism";
  fs::remove_all(root);
  bool all = true;
  auto compare = [&](const std::string& what, auto&& run) {
    const auto a = root / (what + "_a"), b = root / (what + "_b");
    run(a, std::size_t{1});
    run(b, std::size_t{2});
    const auto x = snapshot(a), y = snapshot(b);
    const bool same = !x.empty() && x == y;
    note("%s: %zu files, byte-identical across runs: %s", what.c_str(), x.size(), same ? "yes" : "no");
    all = all && same;
  };
  compare("simulate", [&](const fs::path& out, std::size_t w) {
    cmd_simulate(cfg, SimulateArgs{"ppf", "cb", 20}, out, w);
  });
  compare("train", [&](const fs::path& out, std::size_t w) {
    cmd_train(cfg, TrainArgs{"hierarchical", 4}, out, w);
  });
  const fs::path ckpt = root / "train_a" / "checkpoints" / "best";
  compare("evaluate", [&](const fs::path& out, std::size_t w) {
    cmd_evaluate(cfg, EvaluateArgs{"hierarchical", ckpt, 10}, out, w);
  });
  compare("sweep", [&](const fs::path& out, std::size_t w) {
    cmd_sweep(cfg, SweepArgs{"slots", {5, 10}, {"cb", "cf", "hierarchical@" + ckpt.string()}, 5}, out, w);
  });
  compare("export", [&](const fs::path& out, std::size_t) {
    cmd_export(cfg, ExportArgs{"hierarchical", ckpt, 1}, out);
  });
  fs::remove_all(root);
  const double t = clock.seconds();
  return verdict(8, all, t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int criterion = 0;
  Options o;
  o.workers = default_workers();
  app.add_option("--criterion", criterion, "Criterion number (1-8)")->required()->check(CLI::Range(1, 8));
  app.add_option("--reduced-config", o.reduced_config, "Reduced-scale config for criteria 6-8");
  app.add_option("--work-dir", o.work_dir, "Scratch directory");
  app.add_option("--epochs", o.epochs, "Training epochs per run (criteria 6-7)");
  CLI11_PARSE(app, argc, argv);
  tune_allocator();

  try {
    if (criterion >= 6 && o.reduced_config.empty()) throw ConfigError("--reduced-config is required for criteria 6-8");
    switch (criterion) {
      case 1: return criterion1();
      case 2: return criterion2();
      case 3: return criterion3(o);
      case 4: return criterion4(o);
      case 5: return criterion5(o);
      case 6: return criterion6(load_config(o.reduced_config), o);
      case 7: return criterion7(load_config(o.reduced_config), o);
      case 8: return criterion8(load_config(o.reduced_config), o);
    }
  } catch (const std::exception& e) {
    std::printf("criterion %d: FAIL (error: %s)\n", criterion, e.what());
  }
  return 1;
}
