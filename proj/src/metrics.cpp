#include "sdve/metrics.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace sdve::ppo {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, int n_clusters)
    : out_(path), n_clusters_(n_clusters) {
  if (!out_) throw std::runtime_error("MetricsWriter: cannot open " + path.string());
  out_ << "step,mode,mean_reward,mean_episode_length,mean_delta";
  for (int i = 1; i <= n_clusters_; ++i) out_ << ",rho_" << i;
  out_ << ",max_alpha_p50,max_alpha_p90,boost_scale,policy_loss,value_loss,entropy,cc_loss\n";
}

void MetricsWriter::write(const MetricsRow& row) {
  if (int(row.rho.size()) != n_clusters_)
    throw std::invalid_argument("MetricsWriter: rho size does not match cluster count");
  out_ << row.step << ',' << row.mode << ',' << format_double(row.mean_reward) << ','
       << format_double(row.mean_episode_length) << ',' << format_double(row.mean_delta);
  for (double r : row.rho) out_ << ',' << format_double(r);
  out_ << ',' << format_double(row.max_alpha_p50) << ',' << format_double(row.max_alpha_p90) << ','
       << format_double(row.boost_scale) << ',' << format_double(row.policy_loss) << ','
       << format_double(row.value_loss) << ',' << format_double(row.entropy) << ','
       << format_double(row.cc_loss) << '\n';
  out_.flush();
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return int(i);
  return -1;
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw std::invalid_argument("CsvTable: no column named '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string& cell = row.at(size_t(c));
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw std::invalid_argument("CsvTable: non-numeric cell '" + cell + "' in column " + name);
    }
  }
  return out;
}

std::vector<std::string> CsvTable::string_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw std::invalid_argument("CsvTable: no column named '" + name + "'");
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.at(size_t(c)));
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size())
        throw std::runtime_error("read_csv: ragged row in " + path.string());
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace sdve::ppo
