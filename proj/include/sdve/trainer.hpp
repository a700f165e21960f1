#pragma once

#include <deque>
#include <filesystem>
#include <memory>

#include "sdve/adam.hpp"
#include "sdve/cluster.hpp"
#include "sdve/env_factory.hpp"
#include "sdve/evaluator.hpp"
#include "sdve/metrics.hpp"
#include "sdve/policy_net.hpp"
#include "sdve/rollout.hpp"

namespace sdve::ppo {

struct TrainConfig {
  std::string mode = "dve";  // rl2 | dve | sparse-dve
  uint64_t master_seed = 1;
  envs::EnvSpec env;
  std::vector<uint64_t> eval_level_seeds;

  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double learning_rate = 3e-4;
  int workers = 4;
  int segment_length = 64;
  int epochs = 3;
  int minibatches = 2;
  long total_steps = 40960;
  int eval_interval = 10;  // updates between held-out evaluations
  int eval_episodes = 16;

  int encoder_size = 32;
  int lstm_size = 64;
  int n_clusters = 3;
  dve::CCLossConfig cc;
  bool cc_assignments_only = true;
  bool dump_trajectories = false;

  // canonical config snapshot embedded into checkpoints (set by the CLI)
  std::string config_snapshot;
  uint64_t config_hash = 0;

  // cluster count actually used by the network (rl2 collapses to 1)
  int effective_clusters() const { return mode == "rl2" ? 1 : n_clusters; }
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double cc_loss = 0.0;
};

// Clipped-surrogate PPO with GAE, a recurrent minibatch scheme that keeps
// whole worker segments intact, and the scheduled confusion-contribution
// loss in sparse-dve mode. Workers collect concurrently; updates run on the
// single learner thread; segment merge order is fixed by worker id.
class Trainer {
 public:
  Trainer(TrainConfig cfg, std::filesystem::path run_dir);

  void run();  // full training loop; writes metrics.csv, eval.csv, checkpoint.bin

  // exposed for tests
  RolloutBuffer collect();
  UpdateStats update(RolloutBuffer& buffer, double boost_scale);
  PolicyValueNet& net() { return *net_; }
  long steps_done() const { return steps_done_; }
  EvalResult run_eval();

  static long updates_for(const TrainConfig& cfg) {
    return cfg.total_steps / (long(cfg.workers) * cfg.segment_length);
  }

 private:
  struct WorkerState {
    std::unique_ptr<envs::MultiSceneEnv> env;
    numerics::Rng rng{0};
    std::vector<double> obs;
    numerics::Tensor h, c;
    double ep_return = 0.0;
    int ep_length = 0;
  };

  SegmentData collect_segment(int worker, const PolicyValueNet& frozen);
  MetricsRow batch_diagnostics(const RolloutBuffer& buffer) const;

  TrainConfig cfg_;
  std::filesystem::path run_dir_;
  std::unique_ptr<PolicyValueNet> net_;
  numerics::Adam adam_;
  std::vector<WorkerState> workers_;
  dve::BoostScheduler scheduler_;
  std::vector<double> eval_length_history_;
  std::deque<double> recent_returns_;
  std::deque<int> recent_lengths_;
  UpdateStats last_stats_;
  double last_boost_ = 0.0;
  long steps_done_ = 0;
  int eval_count_ = 0;
  bool ramp_warned_ = false;
};

// Convenience wrapper used by the CLI.
void train(const TrainConfig& cfg, const std::filesystem::path& run_dir);

}  // namespace sdve::ppo
