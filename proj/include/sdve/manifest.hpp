#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sdve::cli {

struct RunManifest {
  std::string config_text;
  uint64_t config_hash = 0;
  uint64_t master_seed = 0;
  std::string mode;
  std::string status;  // running | complete
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> artifacts;
};

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& run_dir);

std::string utc_timestamp();

}  // namespace sdve::cli
