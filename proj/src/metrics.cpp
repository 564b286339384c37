#include "cfmb/metrics.hpp"

#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace cfmb {

using nlohmann::json;

JsonlWriter::JsonlWriter(const std::filesystem::path& path, bool append) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  os_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!os_) throw std::runtime_error("cannot open " + path.string());
}

void JsonlWriter::write(const json& record) {
  std::lock_guard<std::mutex> lock(mu_);
  os_ << record.dump() << '\n';
  os_.flush();
}

json episode_record(const std::string& experiment, const json& point, std::size_t episode, std::uint64_t seed,
                    const EpisodeResult& r) {
  return json{{"schema_version", kMetricsSchemaVersion},
              {"kind", "episode"},
              {"experiment", experiment},
              {"point", point},
              {"episode", episode},
              {"seed", seed},
              {"score", r.score},
              {"frame_vpsnr", r.frame_vpsnr},
              {"scheduler_calls", r.scheduler_calls}};
}

json summary_record(const std::string& experiment, const json& point, const std::string& policy,
                    const EvalSummary& s) {
  return json{{"schema_version", kMetricsSchemaVersion},
              {"kind", "summary"},
              {"experiment", experiment},
              {"point", point},
              {"policy", policy},
              {"episodes", s.scores.size()},
              {"mean", s.mean},
              {"sd", s.sd}};
}

json timing_record(const std::string& experiment, const std::string& step, double seconds) {
  return json{{"schema_version", kMetricsSchemaVersion},
              {"kind", "timing"},
              {"experiment", experiment},
              {"step", step},
              {"wall_seconds", seconds}};
}

std::string check_record(const json& r) {
  if (!r.is_object()) return "record is not an object";
  if (!r.contains("schema_version") || !r["schema_version"].is_number_integer()) return "missing schema_version";
  if (r["schema_version"].get<int>() != kMetricsSchemaVersion) return "unsupported schema_version";
  if (!r.contains("kind") || !r["kind"].is_string()) return "missing kind";
  if (!r.contains("experiment") || !r["experiment"].is_string()) return "missing experiment";
  const auto kind = r["kind"].get<std::string>();
  auto number = [&](const char* k) { return r.contains(k) && r[k].is_number(); };
  if (kind == "episode") {
    if (!number("episode") || !number("score") || !number("seed")) return "episode record lacks episode/score/seed";
    if (!r.contains("frame_vpsnr") || !r["frame_vpsnr"].is_array()) return "episode record lacks frame_vpsnr";
    if (!r.contains("point")) return "episode record lacks point";
  } else if (kind == "summary") {
    if (!number("mean") || !number("sd") || !number("episodes")) return "summary record lacks mean/sd/episodes";
    if (!r.contains("policy") || !r["policy"].is_string()) return "summary record lacks policy";
  } else if (kind == "curve") {
    if (!number("epoch") || !number("mean") || !number("sd")) return "curve record lacks epoch/mean/sd";
  } else if (kind == "timing") {
    if (!number("wall_seconds")) return "timing record lacks wall_seconds";
  } else if (kind != "export" && kind != "cell") {
    return "unknown kind '" + kind + "'";
  }
  return {};
}

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 256 * 1024 * 1024);
#endif
}

}  // namespace cfmb
