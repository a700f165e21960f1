#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdve/trainer.hpp"

namespace sdve::cli {

// Carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct ConfigKey {
  const char* name;
  const char* type;
  const char* default_value;
  const char* doc;
};

std::span<const ConfigKey> config_registry();

// Flat key=value run configuration with dotted namespaces. Unknown keys and
// malformed values are reported together at validation time.
class RunConfig {
 public:
  RunConfig();  // defaults

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  void apply_override(const std::string& key_equals_value);  // "key=value"
  const std::string& get(const std::string& key) const;

  // Full validation; throws ConfigError listing every violation.
  ppo::TrainConfig to_train_config() const;

  // Sorted key=value lines with every key present.
  std::string canonical_text() const;
  uint64_t hash() const;  // FNV-1a over canonical_text()

  std::string run_name() const;  // run.name, or "<env>-<mode>-s<seed>"

 private:
  std::map<std::string, std::string> values_;
};

uint64_t fnv1a64(std::string_view s);

}  // namespace sdve::cli
