#pragma once

#include "sdve/env.hpp"

namespace sdve::envs {

struct ChainLevel {
  int length = 8;          // positions 0..length-1
  double terminal_reward = 0.0;
  double signpost = 0.0;   // noisy reward hint visible in every observation
};

struct ChainOracleConfig {
  int length = 8;
  int step_cap = 0;  // 0 -> 4 * length
  std::vector<double> group_means{2.0, 10.0};
  double group_sigma = 0.5;
  double signpost_noise = 0.25;
  double signpost_scale = 10.0;
  double signpost_fraction = 1.0;  // fraction of levels carrying a signpost; others read 0
};

ChainLevel generate_chain_level(uint64_t seed, const ChainOracleConfig& cfg);

// Deterministic chain with an analytically known value function. Advancing
// from the last position pays the level's terminal reward, so
// V(k) = gamma^(length-1-k) * r. Terminal rewards are drawn from a mixture
// of Gaussians across levels; the signpost is a noisy, level-fixed hint of
// the reward (part of the visible layout).
class ChainOracleEnv final : public MultiSceneEnv {
 public:
  enum Action { kAdvance = 0, kNoop = 1 };

  ChainOracleEnv(const std::vector<uint64_t>& level_seeds, ChainOracleConfig cfg = {});
  // Test hook: explicit levels.
  ChainOracleEnv(std::vector<ChainLevel> levels, int step_cap = 0);

  std::string name() const override { return "chain-oracle"; }
  int action_count() const override { return 2; }
  int observation_size() const override { return 4; }
  int level_count() const override { return int(levels_.size()); }
  std::vector<double> reset_level(int level_index) override;
  StepResult step(int action) override;
  bool episode_active() const override { return active_; }
  int current_level_id() const override { return level_; }
  long discrete_state_id() const override { return pos_; }
  int analysis_label() const override { return 0; }

  // Exact value of (position, level) under the optimal policy.
  double true_value(int level_index, int position, double gamma) const;
  const ChainLevel& level(int index) const { return levels_.at(size_t(index)); }
  int position() const { return pos_; }

 private:
  std::vector<double> observation() const;

  std::vector<ChainLevel> levels_;
  int step_cap_ = 0;
  int level_ = -1;
  int pos_ = 0;
  int t_ = 0;
  bool active_ = false;
};

}  // namespace sdve::envs
