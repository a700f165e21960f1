#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sdve/rng.hpp"

namespace sdve::envs {

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  int level_id = -1;  // analysis side channel, never part of the observation
};

struct EpisodeReturn {
  double discounted = 0.0;
  double undiscounted = 0.0;
  int length = 0;
};

// A suite of seeded levels behind one interface. reset() draws a level
// uniformly at random; the agent is never told which one. Transitions are
// deterministic functions of (level, state, action), so a master seed and an
// action sequence fully determine every trajectory.
class MultiSceneEnv {
 public:
  virtual ~MultiSceneEnv() = default;

  virtual std::string name() const = 0;
  virtual int action_count() const = 0;
  virtual int observation_size() const = 0;
  virtual int level_count() const = 0;

  // Starts an episode on a uniformly sampled level.
  std::vector<double> reset(numerics::Rng& rng);
  // Starts an episode on a specific level (held-out evaluation sweeps).
  virtual std::vector<double> reset_level(int level_index) = 0;

  virtual StepResult step(int action) = 0;
  virtual bool episode_active() const = 0;

  // Analysis side channels. Not visible to the agent.
  virtual int current_level_id() const = 0;
  virtual long discrete_state_id() const = 0;
  virtual int analysis_label() const = 0;
};

}  // namespace sdve::envs
