#include "sdve/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "json.hpp"
#include "sdve/config.hpp"

namespace sdve::cli {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& m) {
  nlohmann::json j;
  j["config"] = m.config_text;
  j["config_hash"] = m.config_hash;
  j["master_seed"] = m.master_seed;
  j["mode"] = m.mode;
  j["status"] = m.status;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["artifacts"] = m.artifacts;
  std::ofstream out(run_dir / "manifest.json");
  if (!out) throw std::runtime_error("write_manifest: cannot open " + (run_dir / "manifest.json").string());
  out << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::filesystem::path& run_dir) {
  std::ifstream in(run_dir / "manifest.json");
  if (!in) throw std::runtime_error("read_manifest: cannot open " + (run_dir / "manifest.json").string());
  nlohmann::json j;
  in >> j;
  RunManifest m;
  m.config_text = j.at("config").get<std::string>();
  m.config_hash = j.at("config_hash").get<uint64_t>();
  m.master_seed = j.at("master_seed").get<uint64_t>();
  m.mode = j.at("mode").get<std::string>();
  m.status = j.at("status").get<std::string>();
  m.started_at = j.at("started_at").get<std::string>();
  m.finished_at = j.at("finished_at").get<std::string>();
  m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
  if (m.config_hash != fnv1a64(m.config_text))
    throw std::runtime_error("read_manifest: config hash does not match stored config");
  return m;
}

}  // namespace sdve::cli
