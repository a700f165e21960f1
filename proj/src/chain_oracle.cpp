#include "sdve/chain_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace sdve::envs {

ChainLevel generate_chain_level(uint64_t seed, const ChainOracleConfig& cfg) {
  if (cfg.group_means.empty()) throw std::invalid_argument("chain-oracle: no reward groups configured");
  numerics::Rng rng(seed ^ 0xc0ffee11ULL);
  ChainLevel lvl;
  lvl.length = cfg.length;
  const int group = rng.uniform_int(int(cfg.group_means.size()));
  lvl.terminal_reward = cfg.group_means[size_t(group)] + cfg.group_sigma * rng.normal();
  // signpost reads as a deviation from the average level, so an unmarked
  // level (signpost 0) is genuinely ambiguous between the reward groups
  double mid = 0.0;
  for (double m : cfg.group_means) mid += m;
  mid /= double(cfg.group_means.size());
  lvl.signpost =
      (lvl.terminal_reward - mid) / cfg.signpost_scale + cfg.signpost_noise * rng.normal();
  if (rng.uniform() >= cfg.signpost_fraction) lvl.signpost = 0.0;  // unmarked level
  return lvl;
}

ChainOracleEnv::ChainOracleEnv(const std::vector<uint64_t>& level_seeds, ChainOracleConfig cfg) {
  if (cfg.length < 2) throw std::invalid_argument("chain-oracle: length must be >= 2");
  levels_.reserve(level_seeds.size());
  for (uint64_t seed : level_seeds) levels_.push_back(generate_chain_level(seed, cfg));
  step_cap_ = cfg.step_cap > 0 ? cfg.step_cap : 4 * cfg.length;
}

ChainOracleEnv::ChainOracleEnv(std::vector<ChainLevel> levels, int step_cap)
    : levels_(std::move(levels)) {
  int max_len = 2;
  for (const ChainLevel& l : levels_) max_len = std::max(max_len, l.length);
  step_cap_ = step_cap > 0 ? step_cap : 4 * max_len;
}

std::vector<double> ChainOracleEnv::reset_level(int level_index) {
  if (level_index < 0 || size_t(level_index) >= levels_.size())
    throw std::invalid_argument("ChainOracleEnv::reset_level: level index out of range");
  level_ = level_index;
  pos_ = 0;
  t_ = 0;
  active_ = true;
  return observation();
}

StepResult ChainOracleEnv::step(int action) {
  if (!active_) throw std::logic_error("ChainOracleEnv::step: episode not active (reset first)");
  if (action < 0 || action >= action_count())
    throw std::invalid_argument("ChainOracleEnv::step: invalid action index");

  const ChainLevel& lvl = levels_[size_t(level_)];
  StepResult out;
  out.level_id = level_;
  ++t_;
  if (action == kAdvance) {
    if (pos_ == lvl.length - 1) {
      out.reward = lvl.terminal_reward;
      out.done = true;
    } else {
      ++pos_;
    }
  }
  if (!out.done && t_ >= step_cap_) out.done = true;
  if (out.done) active_ = false;
  out.observation = out.done ? std::vector<double>(size_t(observation_size()), 0.0) : observation();
  return out;
}

std::vector<double> ChainOracleEnv::observation() const {
  const ChainLevel& lvl = levels_[size_t(level_)];
  const double frac = double(pos_) / double(lvl.length);
  return {frac, 1.0 - frac, lvl.signpost, pos_ == lvl.length - 1 ? 1.0 : 0.0};
}

double ChainOracleEnv::true_value(int level_index, int position, double gamma) const {
  if (level_index < 0 || size_t(level_index) >= levels_.size())
    throw std::invalid_argument("ChainOracleEnv::true_value: level index out of range");
  const ChainLevel& lvl = levels_[size_t(level_index)];
  if (position < 0 || position >= lvl.length)
    throw std::invalid_argument("ChainOracleEnv::true_value: position out of range");
  return std::pow(gamma, double(lvl.length - 1 - position)) * lvl.terminal_reward;
}

}  // namespace sdve::envs
