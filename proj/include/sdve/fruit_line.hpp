#pragma once

#include "sdve/env.hpp"

namespace sdve::envs {

struct FruitColumn {
  bool barrier[3] = {false, false, false};
  bool fruit[3] = {false, false, false};
};

struct FruitLineStyle {
  double barrier_prob = 0.25;  // per off-path lane
  double fruit_prob = 0.35;
  int start_path_lane = 1;
};

FruitLineStyle fruit_line_style(uint64_t seed);

// Deterministic per-level column stream. A hidden "guaranteed path" lane
// performs a random walk and is kept barrier-free, so every level is
// survivable with one lane change per step.
class FruitColumnStream {
 public:
  explicit FruitColumnStream(uint64_t seed);
  const FruitColumn& column(int index);  // generates lazily, index >= 0

 private:
  uint64_t seed_;
  FruitLineStyle style_;
  int path_lane_;
  std::vector<FruitColumn> cache_;
};

// Scrolling three-lane gatherer. Each step the lane conveyor advances one
// column; fruit pays +1, hitting a barrier ends the episode. Reward grows
// with survival time, so episode length and total reward move together.
class FruitLineEnv final : public MultiSceneEnv {
 public:
  enum Action { kStay = 0, kUp = 1, kDown = 2 };
  static constexpr int kEpisodeCap = 500;
  static constexpr int kLookahead = 4;
  static constexpr int kLanes = 3;

  explicit FruitLineEnv(const std::vector<uint64_t>& level_seeds);
  // Test hook: explicit column matrix for one synthetic level.
  explicit FruitLineEnv(std::vector<std::vector<FruitColumn>> levels);

  std::string name() const override { return "fruit-line"; }
  int action_count() const override { return 3; }
  int observation_size() const override { return kLookahead * kLanes * 2 + kLanes + 1; }
  int level_count() const override;
  std::vector<double> reset_level(int level_index) override;
  StepResult step(int action) override;
  bool episode_active() const override { return active_; }
  int current_level_id() const override { return level_; }
  long discrete_state_id() const override { return long(col_) * kLanes + lane_; }
  int analysis_label() const override;

 private:
  std::vector<double> observation();
  const FruitColumn& column(int index);

  std::vector<uint64_t> seeds_;                        // seeded mode
  std::vector<std::vector<FruitColumn>> fixed_levels_; // test mode
  std::unique_ptr<FruitColumnStream> stream_;
  int level_ = -1;
  int lane_ = 1;
  int col_ = 0;
  bool active_ = false;
};

}  // namespace sdve::envs
