#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdve/analysis.hpp"
#include "sdve/config.hpp"

namespace sdve::cli {

// SPARSE_DVE_RUNS_DIR, or ./runs when unset.
std::filesystem::path default_runs_dir();

// Commands throw on error: ConfigError for configuration problems, anything
// else for runtime faults. main() maps these to exit codes 2 and 3.

std::filesystem::path cmd_train(const std::filesystem::path& config_path,
                                const std::vector<std::string>& overrides,
                                const std::filesystem::path& out_dir,  // empty: derive from config
                                bool resume);

struct EvalOptions {
  std::optional<int> levels;          // held-out level count (default: from checkpoint config)
  std::optional<uint64_t> base_seed;  // held-out base seed (default: from checkpoint config)
  int episodes = 32;
  uint64_t seed = 12345;
};

std::filesystem::path cmd_eval(const std::filesystem::path& checkpoint, const EvalOptions& opt,
                               const std::filesystem::path& out_dir);

std::filesystem::path cmd_analyze_correlation(const std::vector<std::filesystem::path>& run_dirs,
                                              double window_frac,
                                              const std::filesystem::path& out_dir);

std::filesystem::path cmd_analyze_spread(const analysis::SpreadConfig& cfg,
                                         const std::filesystem::path& out_dir);

std::filesystem::path cmd_analyze_partition(const std::filesystem::path& checkpoint, int samples,
                                            uint64_t seed, const std::filesystem::path& out_dir);

std::filesystem::path cmd_analyze_efficiency(const std::vector<std::filesystem::path>& checkpoints,
                                             const EvalOptions& opt,
                                             const std::filesystem::path& out_dir);

std::vector<std::filesystem::path> cmd_plot(const std::vector<std::filesystem::path>& csvs,
                                            const std::vector<std::string>& columns,
                                            const std::filesystem::path& out_dir);

}  // namespace sdve::cli
