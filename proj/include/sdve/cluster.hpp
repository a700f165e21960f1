#pragma once

#include <span>
#include <vector>

#include "sdve/tape.hpp"

namespace sdve::dve {

inline constexpr double kSimplexTol = 1e-6;

// V = sum_i alpha_i * mean_i. alpha must lie on the probability simplex
// (checked to kSimplexTol); the result lies in [min(means), max(means)].
double combine(std::span<const double> alpha, std::span<const double> means);

// Confusion delta = 1 / (N * sum_i alpha_i^2), in [1/N, 1]. 1 at the uniform
// assignment, 1/N at a one-hot assignment.
double confusion(std::span<const double> alpha);

// Per-trajectory contributions rho_i = (1/T) sum_t delta_t * alpha_t,i.
// Their sum equals the mean per-step confusion.
std::vector<double> contribution(const std::vector<std::vector<double>>& trajectory_alphas);

// Differentiable confusion-contribution loss over a batch of trajectories,
// each given as per-step simplex vectors already on the tape:
//   k1 * mean_steps[log(delta + eps)] + k2 * mean_traj[log(sum_i rho_i^2 + eps)]
numerics::Tape::Id cc_loss(numerics::Tape& tape,
                           const std::vector<std::vector<numerics::Tape::Id>>& trajectories,
                           double k1, double k2, double eps_log);

enum class BoostMode { kPre, kPost };

struct CCLossConfig {
  double k1 = 0.05;
  double k2 = 0.05;
  double eps_log = 1e-8;
  BoostMode mode = BoostMode::kPre;
  double ramp_fraction = 0.25;    // pre mode: linear ramp over this fraction of total steps
  int window = 5;                 // post mode: evaluation windows used for the slope fit
  double slope_threshold = 1.0;   // post mode: episode-length slope below this arms the boost
  long min_pretrain_steps = 0;    // post mode: never trigger before this step
  long total_steps = 0;
};

// Instantaneous (non-latching) boost scale in [0, 1]. Post mode returns 0
// while fewer than `window` history entries exist.
double boost_coefficient(long step, std::span<const double> episode_length_history,
                         const CCLossConfig& cfg);

// Latching wrapper: once post mode triggers, the scale stays 1.
class BoostScheduler {
 public:
  explicit BoostScheduler(CCLossConfig cfg) : cfg_(cfg) {}
  double scale(long step, std::span<const double> episode_length_history);
  bool latched() const { return latched_; }
  const CCLossConfig& config() const { return cfg_; }

 private:
  CCLossConfig cfg_;
  bool latched_ = false;
};

}  // namespace sdve::dve
