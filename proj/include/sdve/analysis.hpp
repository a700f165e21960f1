#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sdve/checkpoint.hpp"
#include "sdve/env_factory.hpp"
#include "sdve/evaluator.hpp"
#include "sdve/stats.hpp"

namespace sdve::analysis {

struct CorrelationSample {
  double inverse_confusion = 0.0;  // 1 / mean_delta of one logged row
  double reward = 0.0;
  std::string run_id;
  long step = 0;
};

struct CorrelationReport {
  std::vector<CorrelationSample> samples;
  double r = 0.0;
};

// Pools (1/delta, reward) samples from the logged metrics of >= 4 non-sparse
// dve runs, restricted to the first window_frac of each run's steps, and
// reports the Pearson correlation.
CorrelationReport confusion_reward_study(const std::vector<std::filesystem::path>& run_dirs,
                                         double window_frac);

struct SpreadConfig {
  int levels = 40;
  int chain_length = 8;
  double gamma = 0.99;
  std::vector<double> group_means{2.0, 10.0};
  double group_sigma = 0.5;
  double signpost_noise = 0.3;
  double signpost_fraction = 0.9;  // unmarked levels create irreducibly confused states
  int n_clusters = 2;
  int hidden = 16;
  int iters = 900;
  double lr = 0.02;
  double k1 = 1.5;
  double k2 = 0.15;
  double eps_log = 1e-8;
  double weight_decay = 0.03;       // L2 on all weight matrices, shared by both fits
  double cc_start_fraction = 0.33;  // plain pretraining phase before sparsity pressure begins
  double ramp_fraction = 0.15;      // sparsity pressure then ramps in over this fraction
  double head_init_scale = 0.02;    // near-symmetric heads: assignments start close to uniform
  int seeds = 5;
  uint64_t base_seed = 7;
};

struct SpreadSeedResult {
  uint64_t seed = 0;
  // variance of the weighted cluster-mean estimates over the evaluation
  // states; soft assignments attenuate the estimates toward the pooled mean
  double spread_plain = 0.0;
  double spread_sparse = 0.0;
  double mae_plain = 0.0;      // mean |V - predicted|
  double mae_sparse = 0.0;
  double delta_initial = 0.0;  // sparse variant, mean confusion before fitting
  double delta_final = 0.0;    // sparse variant, mean confusion after fitting
  double sharp_fraction = 0.0; // sparse variant, states with max alpha >= 0.9
  // sparse variant: average of the argmax cluster's mean over each group's states
  std::vector<double> selected_mean_by_group;
  std::vector<double> group_value_avg;  // oracle per-group value average over the dataset
  bool diverged = false;
};

struct SpreadReport {
  std::vector<SpreadSeedResult> per_seed;
  int sparse_wins_spread = 0;  // seeds with spread_sparse > spread_plain
  int sparse_wins_mae = 0;     // seeds with mae_sparse < mae_plain
};

// Fits the clustered critic head by regression against the oracle chain's
// exact values, with and without the confusion-contribution loss, and
// compares cluster-mean spread and prediction error.
SpreadReport spread_study(const SpreadConfig& cfg);

struct ClusterPartition {
  int n_clusters = 0;
  long total_states = 0;
  std::vector<long> cluster_sizes;   // argmax assignment, lowest index wins ties
  double sharp_fraction = 0.0;       // states with max alpha >= 0.9
  ChiSquareResult label_association; // clusters vs generator obstacle labels
};

// Rolls out evaluation episodes from a trained checkpoint and partitions the
// visited states by argmax cluster. Per-state records go to dump_path as
// line-delimited JSON. Requires a clustered (n_clusters > 1) checkpoint.
ClusterPartition partition_states(const ppo::LoadedCheckpoint& ck, const envs::EnvSpec& spec,
                                  int sample_count, uint64_t seed,
                                  const std::filesystem::path& dump_path);

struct EfficiencyReport {
  struct ModeRow {
    std::string mode;
    double mean_reward = 0.0;
    double mean_length = 0.0;
    double mean_revisits = 0.0;
  };
  struct EpisodeRow {
    std::string mode;
    int level_index = 0;
    double reward = 0.0;
    int length = 0;
    int revisits = 0;
  };
  std::vector<ModeRow> modes;
  std::vector<EpisodeRow> episodes;
};

// Side-by-side evaluation summary. All supplied results must come from the
// same evaluation level set.
EfficiencyReport efficiency_report(const std::vector<std::pair<std::string, ppo::EvalResult>>& per_mode);

}  // namespace sdve::analysis
