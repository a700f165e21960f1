#pragma once

#include "sdve/env.hpp"

namespace sdve::envs {

// Hazard families.
enum CorridorHazard { kSpike = 0, kOverhang = 1, kSaw = 2, kNoHazard = 3 };

struct CorridorLayout {
  int length = 0;                  // cells 0..length-1, coin on the last cell
  std::vector<int> hazard_family;  // per cell; kNoHazard when empty
  std::vector<int> saw_phase;      // per cell; meaningful only for saw cells
  int dominant_family = 0;
};

// Seeded level generator. Each level draws a dominant hazard family; most of
// its hazards come from that family, so the hazard mix seen early in an
// episode predicts the mix ahead.
CorridorLayout generate_corridor_layout(uint64_t seed);

// One-dimensional platformer strip. The agent walks, jumps, ducks or waits
// its way toward a coin worth +10 on the last cell. Spikes must be jumped,
// overhangs ducked through, saws passed on their off parity. Walking into a
// hazard ends the episode with no reward.
class CorridorCoinEnv final : public MultiSceneEnv {
 public:
  enum Action { kWalk = 0, kJump = 1, kDuck = 2, kWait = 3 };
  static constexpr int kEpisodeCap = 200;
  static constexpr int kLookahead = 3;
  static constexpr double kCoinReward = 10.0;
  static constexpr int kMaxLength = 24;

  explicit CorridorCoinEnv(const std::vector<uint64_t>& level_seeds);
  // Test hook: explicit layouts instead of seeded generation.
  explicit CorridorCoinEnv(std::vector<CorridorLayout> layouts);

  std::string name() const override { return "corridor-coin"; }
  int action_count() const override { return 4; }
  int observation_size() const override { return 5 * kLookahead + 3; }
  int level_count() const override { return int(layouts_.size()); }
  std::vector<double> reset_level(int level_index) override;
  StepResult step(int action) override;
  bool episode_active() const override { return active_; }
  int current_level_id() const override { return level_; }
  long discrete_state_id() const override;
  int analysis_label() const override;

 private:
  std::vector<double> observation() const;
  bool saw_active(int cell, int t) const;

  std::vector<CorridorLayout> layouts_;
  int level_ = -1;
  int pos_ = 0;
  int t_ = 0;
  bool active_ = false;
};

}  // namespace sdve::envs
