#pragma once

#include <cstdint>
#include <vector>

#include "sdve/env_factory.hpp"
#include "sdve/policy_net.hpp"

namespace sdve::ppo {

// Single-env recurrent stepper: runs the network forward one observation at
// a time, carrying the LSTM state, without building gradients across steps.
class PolicyStepper {
 public:
  explicit PolicyStepper(const PolicyValueNet& net);

  struct Out {
    std::vector<double> log_policy;
    std::vector<double> alpha;
    std::vector<double> means;
    double value = 0.0;
  };

  void reset_hidden();
  Out forward(const std::vector<double>& obs);
  const numerics::Tensor& hidden_h() const { return h_; }
  const numerics::Tensor& hidden_c() const { return c_; }

 private:
  const PolicyValueNet& net_;
  numerics::Tensor h_, c_;
};

struct EpisodeRecord {
  int level_index = 0;  // which held-out level this episode ran on
  double undiscounted = 0.0;
  double discounted = 0.0;
  int length = 0;
  int revisits = 0;  // same discrete generator state visited twice in-episode
};

struct EvalResult {
  std::vector<EpisodeRecord> episodes;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double mean_delta = 0.0;
  std::vector<double> mean_rho;
  double max_alpha_p50 = 0.0;
  double max_alpha_p90 = 0.0;
  std::vector<uint64_t> level_seeds;  // identity of the evaluation level set
};

// Deterministic held-out evaluation: episodes cycle the level list in order.
// Actions follow the policy argmax when greedy, otherwise they are sampled
// with an rng derived from `seed`.
EvalResult evaluate(const PolicyValueNet& net, const envs::EnvSpec& spec, int episodes,
                    uint64_t seed, double gamma, bool greedy = false);

// Revisit count for a scripted action sequence on an already-reset env:
// each repeat visit to a discrete generator state within the episode counts.
int count_revisits(envs::MultiSceneEnv& env, const std::vector<int>& actions);

}  // namespace sdve::ppo
