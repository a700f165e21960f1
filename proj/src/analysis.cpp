#include "sdve/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sdve/adam.hpp"
#include "sdve/chain_oracle.hpp"
#include "sdve/cluster.hpp"
#include "sdve/metrics.hpp"

namespace sdve::analysis {

using numerics::Tape;
using numerics::Tensor;

CorrelationReport confusion_reward_study(const std::vector<std::filesystem::path>& run_dirs,
                                         double window_frac) {
  if (run_dirs.size() < 4)
    throw std::invalid_argument("confusion_reward_study: need at least 4 runs");
  if (window_frac <= 0.0 || window_frac > 1.0)
    throw std::invalid_argument("confusion_reward_study: window fraction must be in (0, 1]");

  CorrelationReport report;
  for (const auto& dir : run_dirs) {
    const ppo::CsvTable table = ppo::read_csv(dir / "metrics.csv");
    const auto modes = table.string_column("mode");
    for (const auto& m : modes)
      if (m != "dve")
        throw std::invalid_argument("confusion_reward_study: run " + dir.string() +
                                    " is not a non-sparse dve run (mode=" + m + ")");
    const auto steps = table.numeric_column("step");
    const auto deltas = table.numeric_column("mean_delta");
    const auto rewards = table.numeric_column("mean_reward");
    if (steps.empty()) throw std::invalid_argument("confusion_reward_study: empty metrics in " + dir.string());
    const double max_step = *std::max_element(steps.begin(), steps.end());
    const double cutoff = window_frac * max_step;
    for (size_t i = 0; i < steps.size(); ++i) {
      if (steps[i] > cutoff) continue;
      if (!std::isfinite(rewards[i]) || !std::isfinite(deltas[i]) || deltas[i] <= 0.0) continue;
      report.samples.push_back(
          {1.0 / deltas[i], rewards[i], dir.filename().string(), long(steps[i])});
    }
  }
  if (report.samples.size() < 2)
    throw std::invalid_argument("confusion_reward_study: sampling window is empty");
  std::vector<double> xs, ys;
  xs.reserve(report.samples.size());
  ys.reserve(report.samples.size());
  for (const auto& s : report.samples) {
    xs.push_back(s.inverse_confusion);
    ys.push_back(s.reward);
  }
  report.r = pearson(xs, ys);
  return report;
}

namespace {

// Cluster head for the regression study, mirroring the critic's structure:
// per-cluster means are functions of the state alone, while assignments also
// see the trajectory context (here, the level's signpost). Letting the means
// see the context would make the mixture structure unidentifiable.
struct RegressionHead {
  Tensor mean_enc_W, mean_enc_b, assign_enc_W, assign_enc_b;
  Tensor assign_W, assign_b, mean_W, mean_b;

  RegressionHead(int state_in, int context_in, int hidden, int clusters, double head_scale,
                 numerics::Rng& rng) {
    mean_enc_W = numerics::fanin_init(rng, hidden, state_in);
    mean_enc_b = Tensor({hidden}, 0.0);
    assign_enc_W = numerics::fanin_init(rng, hidden, state_in + context_in);
    assign_enc_b = Tensor({hidden}, 0.0);
    assign_W = numerics::fanin_init(rng, clusters, hidden, head_scale);
    assign_b = Tensor({clusters}, 0.0);
    mean_W = numerics::fanin_init(rng, clusters, hidden, head_scale);
    mean_b = Tensor({clusters}, 0.0);
  }

  std::vector<Tensor*> params() {
    return {&mean_enc_W, &mean_enc_b, &assign_enc_W, &assign_enc_b,
            &assign_W,   &assign_b,   &mean_W,       &mean_b};
  }

  struct Ids {
    Tape::Id mean_enc_W, mean_enc_b, assign_enc_W, assign_enc_b;
    Tape::Id assign_W, assign_b, mean_W, mean_b;
  };
  Ids lease(Tape& tape) const {
    return {tape.leaf(mean_enc_W), tape.leaf(mean_enc_b), tape.leaf(assign_enc_W),
            tape.leaf(assign_enc_b), tape.leaf(assign_W), tape.leaf(assign_b),
            tape.leaf(mean_W),     tape.leaf(mean_b)};
  }

  struct Fwd {
    Tape::Id alpha, means, value;
  };
  static Fwd forward(Tape& tape, const Ids& ids, Tape::Id state, Tape::Id state_and_context) {
    Tape::Id mean_latent = tape.tanh_op(tape.affine(ids.mean_enc_W, state, ids.mean_enc_b));
    Tape::Id assign_latent =
        tape.tanh_op(tape.affine(ids.assign_enc_W, state_and_context, ids.assign_enc_b));
    Fwd f;
    f.alpha = tape.softmax(tape.affine(ids.assign_W, assign_latent, ids.assign_b));
    f.means = tape.affine(ids.mean_W, mean_latent, ids.mean_b);
    f.value = tape.dot(f.alpha, f.means);
    return f;
  }
};

struct RegressionSample {
  std::vector<double> state;    // position features
  std::vector<double> full;     // position features + context (signpost)
  double target = 0.0;
  int level = 0;
  int group = 0;
};

struct FitOutcome {
  double spread = 0.0;
  double mae = 0.0;
  double delta_initial = 0.0;
  double delta_final = 0.0;
  double sharp_fraction = 0.0;
  std::vector<double> selected_mean_by_group;
  bool diverged = false;
};

double mean_confusion(RegressionHead& head, const std::vector<RegressionSample>& data) {
  Tape tape;
  auto ids = head.lease(tape);
  double acc = 0.0;
  for (const auto& s : data) {
    auto f = RegressionHead::forward(tape, ids, tape.leaf(s.state), tape.leaf(s.full));
    acc += dve::confusion(tape.value(f.alpha).data);
  }
  return acc / double(data.size());
}

FitOutcome fit_head(RegressionHead head, const std::vector<RegressionSample>& data, int n_levels,
                    int n_groups, const SpreadConfig& cfg, bool with_cc) {
  numerics::Adam adam({cfg.lr, 0.9, 0.999, 1e-8});
  FitOutcome out;
  out.delta_initial = mean_confusion(head, data);

  for (int iter = 0; iter < cfg.iters; ++iter) {
    Tape tape;
    auto ids = head.lease(tape);
    Tape::Id mse_sum = tape.scalar_leaf(0.0);
    std::vector<std::vector<Tape::Id>> trajectories;
    trajectories.resize(size_t(n_levels));
    for (const auto& s : data) {
      auto f = RegressionHead::forward(tape, ids, tape.leaf(s.state), tape.leaf(s.full));
      mse_sum = tape.add(mse_sum, tape.square(tape.add_const(f.value, -s.target)));
      if (with_cc) trajectories[size_t(s.level)].push_back(f.alpha);
    }
    Tape::Id loss = tape.scale(mse_sum, 1.0 / double(data.size()));
    if (cfg.weight_decay > 0.0) {
      Tape::Id decay = tape.add(tape.dot(ids.assign_W, ids.assign_W),
                                tape.dot(ids.assign_enc_W, ids.assign_enc_W));
      decay = tape.add(decay, tape.dot(ids.mean_W, ids.mean_W));
      decay = tape.add(decay, tape.dot(ids.mean_enc_W, ids.mean_enc_W));
      loss = tape.add(loss, tape.scale(decay, cfg.weight_decay));
    }
    if (with_cc) {
      const double start = cfg.cc_start_fraction * double(cfg.iters);
      const double ramp = std::clamp(
          (double(iter) - start) / std::max(1.0, cfg.ramp_fraction * double(cfg.iters)), 0.0, 1.0);
      if (ramp > 0.0) {
        Tape::Id cc = dve::cc_loss(tape, trajectories, cfg.k1, cfg.k2, cfg.eps_log);
        loss = tape.add(loss, tape.scale(cc, ramp));
      }
    }
    if (!std::isfinite(tape.value(loss)[0])) {
      out.diverged = true;
      return out;
    }
    tape.backward(loss);
    std::vector<const Tensor*> grads = {
        &tape.grad(ids.mean_enc_W), &tape.grad(ids.mean_enc_b), &tape.grad(ids.assign_enc_W),
        &tape.grad(ids.assign_enc_b), &tape.grad(ids.assign_W), &tape.grad(ids.assign_b),
        &tape.grad(ids.mean_W),     &tape.grad(ids.mean_b)};
    adam.step(head.params(), grads);
  }

  // evaluation sweep
  Tape tape;
  auto ids = head.lease(tape);
  double abs_err = 0.0, delta = 0.0;
  long sharp = 0;
  std::vector<double> estimates;
  estimates.reserve(data.size());
  out.selected_mean_by_group.assign(size_t(n_groups), 0.0);
  std::vector<long> group_counts(size_t(n_groups), 0);
  for (const auto& s : data) {
    auto f = RegressionHead::forward(tape, ids, tape.leaf(s.state), tape.leaf(s.full));
    const Tensor& means = tape.value(f.means);
    const Tensor& alpha = tape.value(f.alpha);
    abs_err += std::fabs(tape.value(f.value)[0] - s.target);
    estimates.push_back(tape.value(f.value)[0]);
    delta += dve::confusion(alpha.data);
    int top = 0;
    for (int i = 1; i < cfg.n_clusters; ++i)
      if (alpha[i] > alpha[top]) top = i;
    out.selected_mean_by_group[size_t(s.group)] += means[top];
    group_counts[size_t(s.group)] += 1;
    if (alpha[top] >= 0.9) ++sharp;
  }
  out.mae = abs_err / double(data.size());
  // spread of the weighted cluster-mean estimates over the evaluation states:
  // soft assignments attenuate the estimates toward the pooled mean, so a
  // narrow spread marks the collapsed-cluster regime
  out.spread = variance(estimates);
  out.delta_final = delta / double(data.size());
  out.sharp_fraction = double(sharp) / double(data.size());
  for (size_t g = 0; g < out.selected_mean_by_group.size(); ++g)
    if (group_counts[g] > 0) out.selected_mean_by_group[g] /= double(group_counts[g]);
  return out;
}

}  // namespace

SpreadReport spread_study(const SpreadConfig& cfg) {
  if (cfg.seeds < 1) throw std::invalid_argument("spread_study: need at least 1 seed");
  if (cfg.group_means.size() < 1) throw std::invalid_argument("spread_study: no reward groups");

  SpreadReport report;
  for (int si = 0; si < cfg.seeds; ++si) {
    const uint64_t seed = cfg.base_seed + uint64_t(si) * 1000003ULL;

    envs::ChainOracleConfig chain;
    chain.length = cfg.chain_length;
    chain.group_means = cfg.group_means;
    chain.group_sigma = cfg.group_sigma;
    chain.signpost_noise = cfg.signpost_noise;
    chain.signpost_fraction = cfg.signpost_fraction;
    envs::ChainOracleEnv env(envs::make_level_seeds(seed, cfg.levels), chain);

    std::vector<RegressionSample> data;
    data.reserve(size_t(cfg.levels * cfg.chain_length));
    const int n_groups = int(cfg.group_means.size());
    for (int lvl = 0; lvl < cfg.levels; ++lvl) {
      std::vector<double> obs = env.reset_level(lvl);
      // label the level by its nearest mixture component (components are far apart)
      const double reward = env.level(lvl).terminal_reward;
      int group = 0;
      for (int g = 1; g < n_groups; ++g)
        if (std::fabs(reward - cfg.group_means[size_t(g)]) <
            std::fabs(reward - cfg.group_means[size_t(group)]))
          group = g;
      for (int k = 0; k < cfg.chain_length; ++k) {
        RegressionSample s;
        // observation layout: [k/L, 1-k/L, signpost, terminal-next]
        s.state = {obs[0], obs[1], obs[3]};
        s.full = obs;
        s.target = env.true_value(lvl, k, cfg.gamma);
        s.level = lvl;
        s.group = group;
        data.push_back(s);
        if (k < cfg.chain_length - 1) obs = env.step(envs::ChainOracleEnv::kAdvance).observation;
      }
    }

    numerics::Rng init_rng(seed ^ 0xF17ULL);
    RegressionHead head(3, 1, cfg.hidden, cfg.n_clusters, cfg.head_init_scale, init_rng);

    const FitOutcome plain = fit_head(head, data, cfg.levels, n_groups, cfg, false);
    const FitOutcome sparse = fit_head(head, data, cfg.levels, n_groups, cfg, true);

    SpreadSeedResult r;
    r.seed = seed;
    r.spread_plain = plain.spread;
    r.spread_sparse = sparse.spread;
    r.mae_plain = plain.mae;
    r.mae_sparse = sparse.mae;
    r.delta_initial = sparse.delta_initial;
    r.delta_final = sparse.delta_final;
    r.sharp_fraction = sparse.sharp_fraction;
    r.selected_mean_by_group = sparse.selected_mean_by_group;
    // analytic per-group average of the dataset targets
    r.group_value_avg.assign(size_t(n_groups), 0.0);
    std::vector<long> group_counts(size_t(n_groups), 0);
    for (const auto& s : data) {
      r.group_value_avg[size_t(s.group)] += s.target;
      group_counts[size_t(s.group)] += 1;
    }
    for (size_t g = 0; g < r.group_value_avg.size(); ++g)
      if (group_counts[g] > 0) r.group_value_avg[g] /= double(group_counts[g]);
    r.diverged = plain.diverged || sparse.diverged;
    if (!r.diverged) {
      report.sparse_wins_spread += r.spread_sparse > r.spread_plain;
      report.sparse_wins_mae += r.mae_sparse < r.mae_plain;
    }
    report.per_seed.push_back(r);
  }
  return report;
}

ClusterPartition partition_states(const ppo::LoadedCheckpoint& ck, const envs::EnvSpec& spec,
                                  int sample_count, uint64_t seed,
                                  const std::filesystem::path& dump_path) {
  if (!ck.net) throw std::invalid_argument("partition_states: checkpoint has no network");
  if (sample_count < 1) throw std::invalid_argument("partition_states: sample_count must be >= 1");

  auto env = envs::make_env(spec);
  if (env->observation_size() != ck.net_config.obs_size ||
      env->action_count() != ck.net_config.actions)
    throw std::invalid_argument("partition_states: checkpoint/environment mismatch");

  std::ofstream dump;
  if (!dump_path.empty()) {
    dump.open(dump_path);
    if (!dump) throw std::runtime_error("partition_states: cannot open " + dump_path.string());
  }

  numerics::Rng rng(seed);
  ppo::PolicyStepper stepper(*ck.net);
  ClusterPartition part;
  part.n_clusters = ck.net_config.clusters;
  part.cluster_sizes.assign(size_t(part.n_clusters), 0);

  // labels x clusters contingency; label ids are small non-negative ints
  std::vector<std::vector<double>> table;
  long sharp = 0;
  int episode = 0;
  while (part.total_states < sample_count) {
    std::vector<double> obs = env->reset_level(episode % env->level_count());
    stepper.reset_hidden();
    ++episode;
    bool done = false;
    int t = 0;
    while (!done && part.total_states < sample_count) {
      const int label = env->analysis_label();
      const int level_id = env->current_level_id();
      auto out = stepper.forward(obs);
      // argmax with lowest-index tie-break
      int cluster = 0;
      for (int i = 1; i < part.n_clusters; ++i)
        if (out.alpha[size_t(i)] > out.alpha[size_t(cluster)]) cluster = i;
      const double max_alpha = out.alpha[size_t(cluster)];
      if (max_alpha >= 0.9) ++sharp;
      part.cluster_sizes[size_t(cluster)] += 1;
      part.total_states += 1;
      if (size_t(label) >= table.size()) table.resize(size_t(label) + 1);
      for (auto& row : table) row.resize(size_t(part.n_clusters), 0.0);
      table[size_t(label)][size_t(cluster)] += 1.0;

      if (dump.is_open()) {
        dump << "{\"cluster\":" << cluster << ",\"level_id\":" << level_id << ",\"step\":" << t
             << ",\"obstacle_label\":" << label << ",\"features\":[";
        for (size_t i = 0; i < obs.size(); ++i) {
          if (i) dump << ',';
          dump << ppo::format_double(obs[i]);
        }
        dump << "]}\n";
      }

      std::vector<double> probs(out.log_policy.size());
      for (size_t i = 0; i < probs.size(); ++i) probs[i] = std::exp(out.log_policy[i]);
      auto sr = env->step(rng.categorical(probs));
      obs = sr.observation;
      done = sr.done;
      ++t;
    }
  }

  part.sharp_fraction = double(sharp) / double(part.total_states);
  for (auto& row : table) row.resize(size_t(part.n_clusters), 0.0);
  part.label_association = table.empty() ? ChiSquareResult{} : chi_square_independence(table);

  // argmax partitions are disjoint and covering by construction; keep the
  // bookkeeping honest anyway
  long covered = 0;
  for (long c : part.cluster_sizes) covered += c;
  if (covered != part.total_states)
    throw std::logic_error("partition_states: partition does not cover all samples");
  return part;
}

EfficiencyReport efficiency_report(
    const std::vector<std::pair<std::string, ppo::EvalResult>>& per_mode) {
  if (per_mode.size() < 2) throw std::invalid_argument("efficiency_report: need at least 2 modes");
  for (size_t i = 1; i < per_mode.size(); ++i)
    if (per_mode[i].second.level_seeds != per_mode[0].second.level_seeds)
      throw std::invalid_argument("efficiency_report: modes evaluated on mismatched level sets");

  EfficiencyReport report;
  for (const auto& [mode, ev] : per_mode) {
    EfficiencyReport::ModeRow row;
    row.mode = mode;
    row.mean_reward = ev.mean_reward;
    row.mean_length = ev.mean_length;
    double rv = 0.0;
    for (const auto& ep : ev.episodes) {
      rv += ep.revisits;
      report.episodes.push_back({mode, ep.level_index, ep.undiscounted, ep.length, ep.revisits});
    }
    row.mean_revisits = ev.episodes.empty() ? 0.0 : rv / double(ev.episodes.size());
    report.modes.push_back(row);
  }
  return report;
}

}  // namespace sdve::analysis
