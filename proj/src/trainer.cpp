#include "sdve/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "sdve/checkpoint.hpp"
#include "sdve/stats.hpp"

namespace sdve::ppo {

using numerics::Tape;
using numerics::Tensor;

namespace {

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

void check_finite_term(double v, const char* term, long step) {
  if (!std::isfinite(v))
    throw std::runtime_error("ppo_update: non-finite " + std::string(term) + " at step " +
                             std::to_string(step));
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::filesystem::path run_dir)
    : cfg_(std::move(cfg)), run_dir_(std::move(run_dir)), adam_({cfg_.learning_rate, 0.9, 0.999, 1e-8}),
      scheduler_(cfg_.cc) {
  if (cfg_.workers < 1) throw std::invalid_argument("Trainer: workers must be >= 1");
  if (cfg_.minibatches < 1 || cfg_.minibatches > cfg_.workers)
    throw std::invalid_argument("Trainer: minibatches must be in [1, workers]");
  if (updates_for(cfg_) < 1) throw std::invalid_argument("Trainer: total_steps below one update");

  auto probe = envs::make_env(cfg_.env);
  NetConfig net_cfg;
  net_cfg.obs_size = probe->observation_size();
  net_cfg.actions = probe->action_count();
  net_cfg.encoder_size = cfg_.encoder_size;
  net_cfg.lstm_size = cfg_.lstm_size;
  net_cfg.clusters = cfg_.effective_clusters();
  numerics::Rng init_rng = numerics::Rng::stream(cfg_.master_seed, 0xA11CE);
  net_ = std::make_unique<PolicyValueNet>(net_cfg, init_rng);

  workers_.resize(size_t(cfg_.workers));
  for (int w = 0; w < cfg_.workers; ++w) {
    WorkerState& ws = workers_[size_t(w)];
    ws.env = envs::make_env(cfg_.env);
    ws.rng = numerics::Rng::stream(cfg_.master_seed, uint64_t(1000 + w));
    ws.obs = ws.env->reset(ws.rng);
    ws.h = net_->zero_hidden();
    ws.c = net_->zero_hidden();
  }
}

SegmentData Trainer::collect_segment(int worker, const PolicyValueNet& frozen) {
  WorkerState& ws = workers_[size_t(worker)];
  SegmentData seg;
  seg.worker = worker;
  seg.h0 = ws.h.data;
  seg.c0 = ws.c.data;
  const int T = cfg_.segment_length;
  seg.obs.reserve(size_t(T));

  Tape tape;
  for (int t = 0; t < T; ++t) {
    tape.clear();
    auto ctx = frozen.lease(tape);
    auto fwd = frozen.forward(tape, ctx, tape.leaf(ws.obs), tape.leaf(ws.h), tape.leaf(ws.c));
    const Tensor& logp = tape.value(fwd.log_policy);
    std::vector<double> probs(size_t(logp.size()));
    for (int i = 0; i < logp.size(); ++i) probs[size_t(i)] = std::exp(logp[i]);
    const int action = ws.rng.categorical(probs);

    seg.obs.push_back(ws.obs);
    seg.actions.push_back(action);
    seg.log_probs.push_back(logp[action]);
    seg.values.push_back(tape.value(fwd.value)[0]);
    seg.alphas.push_back(tape.value(fwd.alpha).data);
    seg.level_ids.push_back(ws.env->current_level_id());

    auto sr = ws.env->step(action);
    seg.rewards.push_back(sr.reward);
    seg.dones.push_back(sr.done ? 1 : 0);
    ws.ep_return += sr.reward;
    ws.ep_length += 1;
    if (sr.done) {
      seg.episode_returns.push_back(ws.ep_return);
      seg.episode_lengths.push_back(ws.ep_length);
      ws.ep_return = 0.0;
      ws.ep_length = 0;
      ws.obs = ws.env->reset(ws.rng);
      ws.h.fill(0.0);
      ws.c.fill(0.0);
    } else {
      ws.obs = sr.observation;
      ws.h = tape.value(fwd.h);
      ws.c = tape.value(fwd.c);
    }
  }
  if (!seg.dones.back()) {
    tape.clear();
    auto ctx = frozen.lease(tape);
    auto fwd = frozen.forward(tape, ctx, tape.leaf(ws.obs), tape.leaf(ws.h), tape.leaf(ws.c));
    seg.bootstrap_value = tape.value(fwd.value)[0];
  } else {
    seg.bootstrap_value = 0.0;
  }
  return seg;
}

RolloutBuffer Trainer::collect() {
  RolloutBuffer buffer;
  buffer.segments.resize(size_t(cfg_.workers));
  // each worker steps a private frozen copy of the policy
  std::vector<PolicyValueNet> frozen(size_t(cfg_.workers), *net_);
  std::vector<std::string> faults(size_t(cfg_.workers));
  std::vector<std::thread> threads;
  threads.reserve(size_t(cfg_.workers));
  for (int w = 0; w < cfg_.workers; ++w) {
    threads.emplace_back([this, w, &buffer, &frozen, &faults] {
      try {
        buffer.segments[size_t(w)] = collect_segment(w, frozen[size_t(w)]);
      } catch (const std::exception& e) {
        faults[size_t(w)] = e.what();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (int w = 0; w < cfg_.workers; ++w)
    if (!faults[size_t(w)].empty())
      throw std::runtime_error("worker " + std::to_string(w) + ": " + faults[size_t(w)]);
  return buffer;
}

UpdateStats Trainer::update(RolloutBuffer& buffer, double boost_scale) {
  // normalize advantages across the whole batch
  std::vector<double> all_adv;
  for (const SegmentData& seg : buffer.segments)
    all_adv.insert(all_adv.end(), seg.advantages.begin(), seg.advantages.end());
  if (all_adv.empty()) throw std::invalid_argument("ppo_update: empty buffer");
  const double adv_mean = analysis::mean(all_adv);
  const double adv_std = std::max(std::sqrt(analysis::variance(all_adv)), 1e-8);
  for (SegmentData& seg : buffer.segments)
    for (double& a : seg.advantages) a = (a - adv_mean) / adv_std;

  const bool cc_active = cfg_.mode == "sparse-dve" && cfg_.effective_clusters() > 1 &&
                         boost_scale > 0.0 && (cfg_.cc.k1 > 0.0 || cfg_.cc.k2 > 0.0);

  UpdateStats stats;
  int n_updates = 0;
  const int groups = std::min(cfg_.minibatches, int(buffer.segments.size()));
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (int g = 0; g < groups; ++g) {
      Tape tape;
      auto ctx = net_->lease(tape);
      Tape::Id policy_sum = tape.scalar_leaf(0.0);
      Tape::Id value_sum = tape.scalar_leaf(0.0);
      Tape::Id entropy_sum = tape.scalar_leaf(0.0);
      std::vector<std::vector<Tape::Id>> cc_trajectories;
      long n_steps = 0;

      for (size_t si = size_t(g); si < buffer.segments.size(); si += size_t(groups)) {
        const SegmentData& seg = buffer.segments[si];
        Tape::Id h = tape.leaf(seg.h0);
        Tape::Id c = tape.leaf(seg.c0);
        std::vector<Tape::Id> traj_alphas;
        for (int t = 0; t < seg.length(); ++t) {
          if (t > 0 && seg.dones[size_t(t - 1)]) {
            h = tape.leaf(net_->zero_hidden());
            c = tape.leaf(net_->zero_hidden());
          }
          auto fwd = net_->forward(tape, ctx, tape.leaf(seg.obs[size_t(t)]), h, c);
          h = fwd.h;
          c = fwd.c;
          const double adv = seg.advantages[size_t(t)];
          Tape::Id logp_new = tape.pick(fwd.log_policy, seg.actions[size_t(t)]);
          Tape::Id ratio = tape.exp_op(tape.add_const(logp_new, -seg.log_probs[size_t(t)]));
          Tape::Id surr_raw = tape.scale(ratio, adv);
          Tape::Id surr_clip = tape.scale(tape.clamp(ratio, 1.0 - cfg_.clip, 1.0 + cfg_.clip), adv);
          policy_sum = tape.add(policy_sum, tape.min_elem(surr_raw, surr_clip));

          Tape::Id verr = tape.add_const(fwd.value, -seg.returns[size_t(t)]);
          value_sum = tape.add(value_sum, tape.square(verr));

          Tape::Id probs = tape.exp_op(fwd.log_policy);
          entropy_sum = tape.add(entropy_sum, tape.scale(tape.dot(probs, fwd.log_policy), -1.0));

          if (cc_active) {
            Tape::Id alpha_cc = fwd.alpha;
            if (cfg_.cc_assignments_only) {
              // detach the latent: gradients reach the assignment head only
              Tape::Id latent_d = tape.leaf(tape.value(fwd.latent));
              alpha_cc = tape.softmax(tape.matvec(ctx.assign_W, latent_d));
            }
            traj_alphas.push_back(alpha_cc);
            if (seg.dones[size_t(t)]) {
              cc_trajectories.push_back(std::move(traj_alphas));
              traj_alphas.clear();
            }
          }
          ++n_steps;
        }
        if (cc_active && !traj_alphas.empty()) cc_trajectories.push_back(std::move(traj_alphas));
      }

      Tape::Id policy_loss = tape.scale(policy_sum, -1.0 / double(n_steps));
      Tape::Id value_loss = tape.scale(value_sum, 1.0 / double(n_steps));
      Tape::Id entropy = tape.scale(entropy_sum, 1.0 / double(n_steps));
      Tape::Id loss = tape.add(policy_loss, tape.scale(value_loss, cfg_.value_coef));
      loss = tape.add(loss, tape.scale(entropy, -cfg_.entropy_coef));
      double cc_value = 0.0;
      if (cc_active) {
        Tape::Id cc = dve::cc_loss(tape, cc_trajectories, cfg_.cc.k1, cfg_.cc.k2, cfg_.cc.eps_log);
        cc_value = tape.value(cc)[0];
        loss = tape.add(loss, tape.scale(cc, boost_scale));
      }

      check_finite_term(tape.value(policy_loss)[0], "policy_loss", steps_done_);
      check_finite_term(tape.value(value_loss)[0], "value_loss", steps_done_);
      check_finite_term(tape.value(entropy)[0], "entropy", steps_done_);
      check_finite_term(cc_value, "cc_loss", steps_done_);

      tape.backward(loss);
      auto params = net_->parameters();
      std::vector<const Tensor*> grads = {
          &tape.grad(ctx.enc_W),  &tape.grad(ctx.enc_b),    &tape.grad(ctx.lstm_W),
          &tape.grad(ctx.lstm_b), &tape.grad(ctx.pi_W),     &tape.grad(ctx.pi_b),
          &tape.grad(ctx.assign_W), &tape.grad(ctx.mean_W), &tape.grad(ctx.mean_b)};
      adam_.step(params, grads);

      stats.policy_loss += tape.value(policy_loss)[0];
      stats.value_loss += tape.value(value_loss)[0];
      stats.entropy += tape.value(entropy)[0];
      stats.cc_loss += cc_value;
      ++n_updates;
    }
  }
  stats.policy_loss /= n_updates;
  stats.value_loss /= n_updates;
  stats.entropy /= n_updates;
  stats.cc_loss /= n_updates;
  return stats;
}

MetricsRow Trainer::batch_diagnostics(const RolloutBuffer& buffer) const {
  MetricsRow row;
  const int n_clusters = cfg_.effective_clusters();
  row.rho.assign(size_t(n_clusters), 0.0);
  std::vector<double> max_alphas;
  double delta_sum = 0.0;
  long steps = 0, trajs = 0;
  for (const SegmentData& seg : buffer.segments) {
    for (const auto& alpha : seg.alphas) {
      delta_sum += dve::confusion(alpha);
      max_alphas.push_back(*std::max_element(alpha.begin(), alpha.end()));
      ++steps;
    }
    for (auto [lo, hi] : seg.trajectory_ranges()) {
      std::vector<std::vector<double>> traj(seg.alphas.begin() + lo, seg.alphas.begin() + hi);
      const std::vector<double> rho = dve::contribution(traj);
      for (int i = 0; i < n_clusters; ++i) row.rho[size_t(i)] += rho[size_t(i)];
      ++trajs;
    }
  }
  row.mean_delta = delta_sum / double(steps);
  for (double& r : row.rho) r /= double(trajs);
  row.max_alpha_p50 = analysis::percentile(max_alphas, 0.5);
  row.max_alpha_p90 = analysis::percentile(max_alphas, 0.9);
  return row;
}

EvalResult Trainer::run_eval() {
  envs::EnvSpec eval_spec = cfg_.env;
  eval_spec.level_seeds = cfg_.eval_level_seeds;
  uint64_t s = cfg_.master_seed ^ 0xE7A1000000000000ULL;
  for (int i = 0; i <= eval_count_; ++i) numerics::splitmix64(s);
  ++eval_count_;
  return evaluate(*net_, eval_spec, cfg_.eval_episodes, s, cfg_.gamma, /*greedy=*/true);
}

void Trainer::run() {
  std::filesystem::create_directories(run_dir_);
  const int n_clusters = cfg_.effective_clusters();
  MetricsWriter metrics(run_dir_ / "metrics.csv", n_clusters);
  MetricsWriter eval_csv(run_dir_ / "eval.csv", n_clusters);

  auto write_eval_row = [&](const EvalResult& ev) {
    MetricsRow row;
    row.step = steps_done_;
    row.mode = cfg_.mode;
    row.mean_reward = ev.mean_reward;
    row.mean_episode_length = ev.mean_length;
    row.mean_delta = ev.mean_delta;
    row.rho = ev.mean_rho;
    row.max_alpha_p50 = ev.max_alpha_p50;
    row.max_alpha_p90 = ev.max_alpha_p90;
    row.boost_scale = last_boost_;
    row.policy_loss = last_stats_.policy_loss;
    row.value_loss = last_stats_.value_loss;
    row.entropy = last_stats_.entropy;
    row.cc_loss = last_stats_.cc_loss;
    eval_csv.write(row);
    eval_length_history_.push_back(ev.mean_length);
  };

  const long updates = updates_for(cfg_);
  const long per_update = long(cfg_.workers) * cfg_.segment_length;
  const bool sparse = cfg_.mode == "sparse-dve" && n_clusters > 1;

  for (long u = 0; u < updates; ++u) {
    if (u % cfg_.eval_interval == 0) write_eval_row(run_eval());

    double boost = 0.0;
    if (sparse) {
      boost = scheduler_.scale(steps_done_, eval_length_history_);
      if (cfg_.cc.mode == dve::BoostMode::kPre && boost >= 1.0 && !ramp_warned_) {
        ramp_warned_ = true;
        if (int(eval_length_history_.size()) >= cfg_.cc.window) {
          std::span<const double> hist(eval_length_history_);
          const double slope =
              analysis::least_squares_slope(hist.subspan(hist.size() - size_t(cfg_.cc.window)));
          if (slope >= cfg_.cc.slope_threshold)
            std::cerr << "warning: confusion-contribution ramp completed while episode length is "
                         "still rising (slope "
                      << slope << ")\n";
        }
      }
    }
    last_boost_ = boost;

    RolloutBuffer buffer = collect();
    compute_gae(buffer, cfg_.gamma, cfg_.gae_lambda);
    for (const SegmentData& seg : buffer.segments) {
      for (size_t i = 0; i < seg.episode_returns.size(); ++i) {
        recent_returns_.push_back(seg.episode_returns[i]);
        recent_lengths_.push_back(seg.episode_lengths[i]);
        if (recent_returns_.size() > 50) {
          recent_returns_.pop_front();
          recent_lengths_.pop_front();
        }
      }
    }

    MetricsRow row = batch_diagnostics(buffer);
    last_stats_ = update(buffer, boost);
    steps_done_ += per_update;

    row.step = steps_done_;
    row.mode = cfg_.mode;
    if (recent_returns_.empty()) {
      row.mean_reward = nan_value();
      row.mean_episode_length = nan_value();
    } else {
      double r = 0.0, l = 0.0;
      for (double v : recent_returns_) r += v;
      for (int v : recent_lengths_) l += v;
      row.mean_reward = r / double(recent_returns_.size());
      row.mean_episode_length = l / double(recent_lengths_.size());
    }
    row.boost_scale = boost;
    row.policy_loss = last_stats_.policy_loss;
    row.value_loss = last_stats_.value_loss;
    row.entropy = last_stats_.entropy;
    row.cc_loss = last_stats_.cc_loss;
    metrics.write(row);
  }

  write_eval_row(run_eval());
  save_checkpoint(run_dir_ / "checkpoint.bin", *net_, cfg_.mode, cfg_.config_snapshot,
                  cfg_.config_hash);

  if (cfg_.dump_trajectories) {
    std::ofstream dump(run_dir_ / "trajectories.jsonl");
    envs::EnvSpec eval_spec = cfg_.env;
    eval_spec.level_seeds = cfg_.eval_level_seeds;
    auto env = envs::make_env(eval_spec);
    numerics::Rng rng = numerics::Rng::stream(cfg_.master_seed, 0xD00D);
    PolicyStepper stepper(*net_);
    const int n_dump = std::min(8, env->level_count());
    for (int e = 0; e < n_dump; ++e) {
      std::vector<double> obs = env->reset_level(e);
      stepper.reset_hidden();
      bool done = false;
      int t = 0;
      while (!done) {
        auto out = stepper.forward(obs);
        std::vector<double> probs(out.log_policy.size());
        for (size_t i = 0; i < probs.size(); ++i) probs[i] = std::exp(out.log_policy[i]);
        const int action = rng.categorical(probs);
        auto sr = env->step(action);
        dump << "{\"episode\":" << e << ",\"step\":" << t << ",\"level\":" << sr.level_id
             << ",\"action\":" << action << ",\"reward\":" << format_double(sr.reward)
             << ",\"done\":" << (sr.done ? "true" : "false") << "}\n";
        obs = sr.observation;
        done = sr.done;
        ++t;
      }
    }
  }
}

void train(const TrainConfig& cfg, const std::filesystem::path& run_dir) {
  Trainer trainer(cfg, run_dir);
  trainer.run();
}

}  // namespace sdve::ppo
