#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>

#include <json.hpp>

#include "cfmb/engine.hpp"

namespace cfmb {

inline constexpr int kMetricsSchemaVersion = 1;

/// Append-only line-delimited JSON file; one writer shared by all threads.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path, bool append = false);
  void write(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream os_;
  std::mutex mu_;
};

/// One evaluated episode. Wall time is kept out of it on purpose so that
/// repeated runs give byte-identical files; see timing_record.
nlohmann::json episode_record(const std::string& experiment, const nlohmann::json& point, std::size_t episode,
                              std::uint64_t seed, const EpisodeResult& result);

nlohmann::json summary_record(const std::string& experiment, const nlohmann::json& point, const std::string& policy,
                              const EvalSummary& summary);

nlohmann::json timing_record(const std::string& experiment, const std::string& step, double seconds);

/// Checks the fields every record must carry; returns an empty string when
/// the record is valid, otherwise the reason.
std::string check_record(const nlohmann::json& record);

/// Raises the allocator's mmap threshold so that the per-batch matrices of
/// the networks are recycled instead of mapped and unmapped every update.
void tune_allocator();

}  // namespace cfmb
