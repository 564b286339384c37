#include "cfmb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cfmb/errors.hpp"

namespace cfmb {

using nlohmann::json;

namespace {

// Reads typed values out of one JSON object and remembers which keys were seen.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
        out = v->get<bool>();
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!v->is_number_integer() || v->get<long long>() < 0)
          throw ConfigError(key_path(key) + ": expected a non-negative integer");
        out = v->get<T>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError(key_path(key) + ": expected a number");
        out = v->get<T>();
        if (!std::isfinite(out)) throw ConfigError(key_path(key) + ": must be finite");
      } else {
        out = v->get<T>();
      }
    } catch (const json::exception&) {
      throw ConfigError(key_path(key) + ": wrong type");
    }
  }

  Section child(const std::string& key) {
    const json* v = find(key);
    static const json empty = json::object();
    return Section(v ? *v : empty, key_path(key));
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key_path(it.key()) + ": unknown key");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void get_db(Section& s, const std::string& key, double& linear, bool dbm) {
  const json* v = s.find(key);
  if (!v) return;
  if (!v->is_number()) throw ConfigError(s.key_path(key) + ": expected a number");
  const double db = v->get<double>();
  linear = dbm ? dbm_to_watts(db) : db_to_linear(db);
}

std::pair<double, double> get_pair(Section& s, const std::string& key, std::pair<double, double> def) {
  const json* v = s.find(key);
  if (!v) return def;
  if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
    throw ConfigError(s.key_path(key) + ": expected a pair of numbers");
  return {(*v)[0].get<double>(), (*v)[1].get<double>()};
}

template <class T>
void get_list(Section& s, const std::string& key, std::vector<T>& out) {
  const json* v = s.find(key);
  if (!v) return;
  if (!v->is_array()) throw ConfigError(s.key_path(key) + ": expected a list");
  std::vector<T> r;
  for (const auto& e : *v) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!e.is_string()) throw ConfigError(s.key_path(key) + ": expected a list of strings");
      r.push_back(e.get<std::string>());
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!e.is_number_integer() || e.get<long long>() < 1)
        throw ConfigError(s.key_path(key) + ": expected a list of positive integers");
      r.push_back(e.get<T>());
    } else {
      if (!e.is_number()) throw ConfigError(s.key_path(key) + ": expected a list of numbers");
      r.push_back(e.get<T>());
    }
  }
  out = std::move(r);
}

std::string requester_mode_name(agents::RequesterMode m) {
  return m == agents::RequesterMode::Current ? "current" : "schedule";
}

}  // namespace

void ExperimentConfig::validate() const {
  sim.validate();
  agent.validate();
  if (train.eval_episodes < 1) throw ConfigError("train.eval_episodes: must be at least 1");
  if (evaluate.episodes < 1) throw ConfigError("evaluate.episodes: must be at least 1");
  if (sweep.episodes < 1) throw ConfigError("sweep.episodes: must be at least 1");
  const auto& axes = sweep_axes();
  if (std::find(axes.begin(), axes.end(), sweep.axis) == axes.end())
    throw ConfigError("sweep.axis: unknown axis '" + sweep.axis + "' (options: n_users, cluster_radius, slots, n_uavs)");
  if (sweep.values.empty()) throw ConfigError("sweep.values: must not be empty");
  if (sweep.policies.empty()) throw ConfigError("sweep.policies: must not be empty");
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  const json empty = json::object();
  Section root(doc.is_null() ? empty : doc, "");
  root.get("name", c.name);
  root.get("seed", c.seed);
  root.get("output_dir", c.output_dir);

  {
    auto s = root.child("deployment");
    auto& d = c.sim.deployment;
    const auto grid = get_pair(s, "ap_grid", {static_cast<double>(d.ap_grid.rows), static_cast<double>(d.ap_grid.cols)});
    if (grid.first < 1 || grid.second < 1 || grid.first != std::floor(grid.first) || grid.second != std::floor(grid.second))
      throw ConfigError("deployment.ap_grid: expected [rows, cols] of positive integers");
    d.ap_grid = {static_cast<std::size_t>(grid.first), static_cast<std::size_t>(grid.second)};
    s.get("ap_spacing", d.ap_spacing);
    s.get("area_side", d.area_side);
    s.get("n_uavs", d.n_uavs);
    s.get("uav_height", d.uav_height);
    s.get("n_users", d.n_users);
    s.get("cluster_radius", d.cluster_radius);
    if (const json* v = s.find("cluster_centers")) {
      if (!v->is_array()) throw ConfigError("deployment.cluster_centers: expected a list of [x, y] pairs");
      std::vector<std::pair<double, double>> centers;
      for (const auto& e : *v) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
          throw ConfigError("deployment.cluster_centers: expected a list of [x, y] pairs");
        centers.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
      d.cluster_centers = std::move(centers);
    }
    s.finish();
  }
  {
    auto s = root.child("channel");
    auto& ch = c.sim.channel;
    s.get("f_ul", ch.f_ul);
    s.get("f_dl", ch.f_dl);
    s.get("alpha_ul", ch.alpha_ul);
    s.get("alpha_dl", ch.alpha_dl);
    get_db(s, "eta_los_db", ch.eta_los, false);
    get_db(s, "eta_nlos_db", ch.eta_nlos, false);
    get_db(s, "noise_dbm", ch.noise_power, true);
    get_db(s, "p_uav_dbm", ch.p_uav, true);
    get_db(s, "p_ap_dbm", ch.p_ap, true);
    s.get("b_ul", ch.b_ul);
    s.get("b_dl", ch.b_dl);
    s.get("min_distance", ch.min_distance);
    s.get("bernoulli_los", ch.bernoulli_los);
    s.finish();
  }
  {
    auto s = root.child("video");
    auto& v = c.sim.video;
    s.get("pixels_per_degree", v.pixels_per_degree);
    s.get("bits_per_pixel", v.bits_per_pixel);
    s.get("compression_rate", v.compression_rate);
    s.get("p_over_i_ratio", v.p_over_i_ratio);
    const auto band = get_pair(s, "pitch_band", {c.sim.pitch.min_deg, c.sim.pitch.max_deg});
    c.sim.pitch = {band.first, band.second};
    s.finish();
  }
  {
    auto s = root.child("time");
    auto& t = c.sim.time;
    s.get("frames_per_gop", t.frames_per_gop);
    s.get("reschedules_per_frame", t.reschedules_per_frame);
    s.get("slots_per_reschedule", t.slots_per_reschedule);
    s.get("slot_seconds", t.slot_seconds);
    s.get("calibration_sinr_db", t.calibration_sinr_db);
    s.get("fed_interval", t.fed_interval);
    s.get("train_interval", t.train_interval);
    s.finish();
  }
  {
    auto s = root.child("engine");
    auto& e = c.sim.engine;
    s.get("force_success", e.force_success);
    s.get("coherent_mrc", e.coherent_mrc);
    s.get("grid_cell", e.grid_cell);
    s.get("observation_window", e.observation_window);
    s.finish();
  }
  {
    auto s = root.child("agent");
    auto& a = c.agent;
    get_list(s, "conv_channels", a.conv_channels);
    s.get("hidden", a.hidden);
    s.get("stream_hidden", a.stream_hidden);
    get_list(s, "scheduler_conv", a.scheduler_conv);
    s.get("scheduler_hidden", a.scheduler_hidden);
    s.get("atoms", a.atoms);
    s.get("scheduler_atoms", a.scheduler_atoms);
    s.get("noisy_sigma0", a.noisy_sigma0);
    s.get("dropout", a.dropout);
    s.get("lr", a.lr);
    s.get("adam_eps", a.adam_eps);
    s.get("clip_norm", a.clip_norm);
    s.get("gamma", a.gamma);
    s.get("scheduler_gamma", a.scheduler_gamma);
    s.get("n_step", a.n_step);
    s.get("batch_size", a.batch_size);
    s.get("replay_capacity", a.replay_capacity);
    s.get("learn_start", a.learn_start);
    s.get("target_sync", a.target_sync);
    s.get("priority_alpha", a.priority_alpha);
    s.get("beta_start", a.beta_start);
    s.get("beta_anneal_steps", a.beta_anneal_steps);
    s.get("boltzmann_beta", a.boltzmann_beta);
    s.get("boltzmann_sign", a.boltzmann_sign);
    s.get("greedy_eval", a.greedy_eval);
    s.get("reward_scale", a.reward_scale);
    s.get("vmax", a.vmax);
    s.get("scheduler_vmax", a.scheduler_vmax);
    s.get("action_cap", a.action_cap);
    s.get("scheduler_train_steps", a.scheduler_train_steps);
    std::string mode = requester_mode_name(a.requester_map);
    s.get("requester_map", mode);
    if (mode == "schedule") {
      a.requester_map = agents::RequesterMode::Schedule;
    } else if (mode == "current") {
      a.requester_map = agents::RequesterMode::Current;
    } else {
      throw ConfigError("agent.requester_map: expected 'schedule' or 'current'");
    }
    s.finish();
  }
  {
    auto s = root.child("train");
    s.get("epochs", c.train.epochs);
    s.get("eval_interval", c.train.eval_interval);
    s.get("eval_episodes", c.train.eval_episodes);
    s.finish();
  }
  {
    auto s = root.child("evaluate");
    s.get("episodes", c.evaluate.episodes);
    s.finish();
  }
  {
    auto s = root.child("sweep");
    s.get("axis", c.sweep.axis);
    get_list(s, "values", c.sweep.values);
    get_list(s, "policies", c.sweep.policies);
    s.get("episodes", c.sweep.episodes);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return parse_config(json::object());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const ExperimentConfig& c) {
  const auto& d = c.sim.deployment;
  const auto& ch = c.sim.channel;
  const auto& v = c.sim.video;
  const auto& t = c.sim.time;
  const auto& e = c.sim.engine;
  const auto& a = c.agent;
  auto watts_to_dbm = [](double w) { return 10.0 * std::log10(w) + 30.0; };
  json centers = nullptr;
  if (d.cluster_centers) {
    centers = json::array();
    for (const auto& [x, y] : *d.cluster_centers) centers.push_back({x, y});
  }
  return json{
      {"name", c.name},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"deployment",
       {{"ap_grid", {d.ap_grid.rows, d.ap_grid.cols}},
        {"ap_spacing", d.ap_spacing},
        {"area_side", d.area_side},
        {"n_uavs", d.n_uavs},
        {"uav_height", d.uav_height},
        {"n_users", d.n_users},
        {"cluster_radius", d.cluster_radius},
        {"cluster_centers", centers}}},
      {"channel",
       {{"f_ul", ch.f_ul},
        {"f_dl", ch.f_dl},
        {"alpha_ul", ch.alpha_ul},
        {"alpha_dl", ch.alpha_dl},
        {"eta_los_db", linear_to_db(ch.eta_los)},
        {"eta_nlos_db", linear_to_db(ch.eta_nlos)},
        {"noise_dbm", watts_to_dbm(ch.noise_power)},
        {"p_uav_dbm", watts_to_dbm(ch.p_uav)},
        {"p_ap_dbm", watts_to_dbm(ch.p_ap)},
        {"b_ul", ch.b_ul},
        {"b_dl", ch.b_dl},
        {"min_distance", ch.min_distance},
        {"bernoulli_los", ch.bernoulli_los}}},
      {"video",
       {{"pixels_per_degree", v.pixels_per_degree},
        {"bits_per_pixel", v.bits_per_pixel},
        {"compression_rate", v.compression_rate},
        {"p_over_i_ratio", v.p_over_i_ratio},
        {"pitch_band", {c.sim.pitch.min_deg, c.sim.pitch.max_deg}}}},
      {"time",
       {{"frames_per_gop", t.frames_per_gop},
        {"reschedules_per_frame", t.reschedules_per_frame},
        {"slots_per_reschedule", t.slots_per_reschedule},
        {"slot_seconds", t.slot_seconds},
        {"calibration_sinr_db", t.calibration_sinr_db},
        {"fed_interval", t.fed_interval},
        {"train_interval", t.train_interval}}},
      {"engine",
       {{"force_success", e.force_success},
        {"coherent_mrc", e.coherent_mrc},
        {"grid_cell", e.grid_cell},
        {"observation_window", e.observation_window}}},
      {"agent",
       {{"conv_channels", a.conv_channels},
        {"hidden", a.hidden},
        {"stream_hidden", a.stream_hidden},
        {"scheduler_conv", a.scheduler_conv},
        {"scheduler_hidden", a.scheduler_hidden},
        {"atoms", a.atoms},
        {"scheduler_atoms", a.scheduler_atoms},
        {"noisy_sigma0", a.noisy_sigma0},
        {"dropout", a.dropout},
        {"lr", a.lr},
        {"adam_eps", a.adam_eps},
        {"clip_norm", a.clip_norm},
        {"gamma", a.gamma},
        {"scheduler_gamma", a.scheduler_gamma},
        {"n_step", a.n_step},
        {"batch_size", a.batch_size},
        {"replay_capacity", a.replay_capacity},
        {"learn_start", a.learn_start},
        {"target_sync", a.target_sync},
        {"priority_alpha", a.priority_alpha},
        {"beta_start", a.beta_start},
        {"beta_anneal_steps", a.beta_anneal_steps},
        {"boltzmann_beta", a.boltzmann_beta},
        {"boltzmann_sign", a.boltzmann_sign},
        {"greedy_eval", a.greedy_eval},
        {"reward_scale", a.reward_scale},
        {"vmax", a.vmax},
        {"scheduler_vmax", a.scheduler_vmax},
        {"action_cap", a.action_cap},
        {"scheduler_train_steps", a.scheduler_train_steps},
        {"requester_map", requester_mode_name(a.requester_map)}}},
      {"train",
       {{"epochs", c.train.epochs}, {"eval_interval", c.train.eval_interval}, {"eval_episodes", c.train.eval_episodes}}},
      {"evaluate", {{"episodes", c.evaluate.episodes}}},
      {"sweep",
       {{"axis", c.sweep.axis},
        {"values", c.sweep.values},
        {"policies", c.sweep.policies},
        {"episodes", c.sweep.episodes}}},
  };
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << to_json(cfg).dump(2) << '\n';
}

const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"n_users", "cluster_radius", "slots", "n_uavs"};
  return axes;
}

SimConfig apply_sweep_value(const SimConfig& base, const std::string& axis, double value) {
  SimConfig c = base;
  auto as_count = [&](const char* what) {
    if (!(value >= 0.0) || value != std::floor(value)) throw ConfigError(std::string("sweep.values: ") + what + " must be a whole number");
    return static_cast<std::size_t>(value);
  };
  if (axis == "n_users") {
    c.deployment.n_users = as_count("n_users");
  } else if (axis == "cluster_radius") {
    if (value < 0.0) throw ConfigError("sweep.values: cluster_radius must be non-negative");
    c.deployment.cluster_radius = value;
  } else if (axis == "slots") {
    const std::size_t v = as_count("slots");
    if (v < 1) throw ConfigError("sweep.values: slots must be at least 1");
    c.time.slot_seconds = base.slot_seconds() * static_cast<double>(base.time.slots_per_reschedule) / static_cast<double>(v);
    c.time.slots_per_reschedule = v;
  } else if (axis == "n_uavs") {
    c.deployment.n_uavs = as_count("n_uavs");
  } else {
    throw ConfigError("sweep.axis: unknown axis '" + axis + "' (options: n_users, cluster_radius, slots, n_uavs)");
  }
  c.validate();
  return c;
}

}  // namespace cfmb
