#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace sdve::ppo {

struct MetricsRow {
  long step = 0;
  std::string mode;
  double mean_reward = 0.0;
  double mean_episode_length = 0.0;
  double mean_delta = 0.0;
  std::vector<double> rho;  // one entry per cluster
  double max_alpha_p50 = 0.0;
  double max_alpha_p90 = 0.0;
  double boost_scale = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double cc_loss = 0.0;
};

// Fixed-order CSV: step, mode, mean_reward, mean_episode_length, mean_delta,
// rho_1..rho_N, max_alpha_p50, max_alpha_p90, boost_scale, policy_loss,
// value_loss, entropy, cc_loss.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, int n_clusters);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
  int n_clusters_;
};

std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> numeric_column(const std::string& name) const;
  std::vector<std::string> string_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace sdve::ppo
