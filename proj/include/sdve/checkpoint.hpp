#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "sdve/policy_net.hpp"

namespace sdve::ppo {

struct LoadedCheckpoint {
  NetConfig net_config;
  std::string mode;
  std::string config_text;  // full config snapshot of the producing run
  uint64_t config_hash = 0;
  std::unique_ptr<PolicyValueNet> net;
};

// Versioned binary blob: magic, format version, config hash, mode string,
// config snapshot, network dimensions, named parameter tensors.
void save_checkpoint(const std::filesystem::path& path, PolicyValueNet& net,
                     const std::string& mode, const std::string& config_text,
                     uint64_t config_hash);

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sdve::ppo
