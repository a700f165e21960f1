#include "sdve/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "sdve/manifest.hpp"
#include "sdve/metrics.hpp"
#include "sdve/svg_chart.hpp"

namespace sdve::cli {

namespace fs = std::filesystem;

std::filesystem::path default_runs_dir() {
  if (const char* env = std::getenv("SPARSE_DVE_RUNS_DIR")) return fs::path(env);
  return fs::path("runs");
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

// Rebuild the training configuration embedded in a checkpoint.
ppo::TrainConfig train_config_from_checkpoint(const ppo::LoadedCheckpoint& ck) {
  if (ck.config_text.empty())
    throw std::runtime_error("checkpoint carries no config snapshot; cannot rebuild environment");
  return RunConfig::from_text(ck.config_text).to_train_config();
}

}  // namespace

fs::path cmd_train(const fs::path& config_path, const std::vector<std::string>& overrides,
                   const fs::path& out_dir, bool resume) {
  RunConfig rc = RunConfig::from_file(config_path);
  for (const std::string& kv : overrides) rc.apply_override(kv);
  ppo::TrainConfig cfg = rc.to_train_config();  // throws ConfigError with all violations

  fs::path run_dir = out_dir.empty() ? default_runs_dir() / rc.run_name() : out_dir;
  if (fs::exists(run_dir) && !resume)
    throw std::runtime_error("run directory " + run_dir.string() +
                             " already exists (pass --resume to reuse it)");
  fs::create_directories(run_dir);
  write_text(run_dir / "config.cfg", rc.canonical_text());

  RunManifest manifest;
  manifest.config_text = rc.canonical_text();
  manifest.config_hash = rc.hash();
  manifest.master_seed = cfg.master_seed;
  manifest.mode = cfg.mode;
  manifest.status = "running";
  manifest.started_at = utc_timestamp();
  manifest.artifacts = {"config.cfg", "metrics.csv", "eval.csv", "checkpoint.bin"};
  if (cfg.dump_trajectories) manifest.artifacts.push_back("trajectories.jsonl");
  write_manifest(run_dir, manifest);

  ppo::train(cfg, run_dir);

  manifest.status = "complete";
  manifest.finished_at = utc_timestamp();
  write_manifest(run_dir, manifest);
  return run_dir;
}

fs::path cmd_eval(const fs::path& checkpoint, const EvalOptions& opt, const fs::path& out_dir) {
  if (opt.episodes < 1) throw ConfigError({"eval: episode count must be >= 1"});
  ppo::LoadedCheckpoint ck = ppo::load_checkpoint(checkpoint);
  ppo::TrainConfig train_cfg = train_config_from_checkpoint(ck);

  envs::EnvSpec spec = train_cfg.env;
  if (opt.levels.has_value() || opt.base_seed.has_value()) {
    const int n = opt.levels.value_or(int(train_cfg.eval_level_seeds.size()));
    const uint64_t base = opt.base_seed.value_or(900000);
    spec.level_seeds = envs::make_level_seeds(base, n);
  } else {
    spec.level_seeds = train_cfg.eval_level_seeds;
  }

  // held-out check against the training levels recorded in the checkpoint
  std::set<uint64_t> train_seeds(train_cfg.env.level_seeds.begin(), train_cfg.env.level_seeds.end());
  bool overlap = false;
  for (uint64_t s : spec.level_seeds)
    if (train_seeds.count(s)) overlap = true;
  if (overlap)
    std::cerr << "warning: evaluation level set overlaps the training levels of " +
                     checkpoint.string() + "\n";

  ppo::EvalResult ev =
      ppo::evaluate(*ck.net, spec, opt.episodes, opt.seed, train_cfg.gamma, /*greedy=*/true);

  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "eval_report.csv");
    out << "mode,episodes,mean_reward,mean_episode_length,mean_revisits,train_overlap\n";
    double rv = 0.0;
    for (const auto& ep : ev.episodes) rv += ep.revisits;
    out << ck.mode << ',' << opt.episodes << ',' << ppo::format_double(ev.mean_reward) << ','
        << ppo::format_double(ev.mean_length) << ','
        << ppo::format_double(rv / double(ev.episodes.size())) << ',' << (overlap ? 1 : 0) << '\n';
  }
  {
    std::ofstream out(out_dir / "eval_episodes.csv");
    out << "mode,level_index,reward,length,revisits\n";
    for (const auto& ep : ev.episodes)
      out << ck.mode << ',' << ep.level_index << ',' << ppo::format_double(ep.undiscounted) << ','
          << ep.length << ',' << ep.revisits << '\n';
  }
  return out_dir;
}

fs::path cmd_analyze_correlation(const std::vector<fs::path>& run_dirs, double window_frac,
                                 const fs::path& out_dir) {
  analysis::CorrelationReport report = analysis::confusion_reward_study(run_dirs, window_frac);
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "correlation_samples.csv");
    out << "run_id,step,inverse_confusion,reward\n";
    for (const auto& s : report.samples)
      out << s.run_id << ',' << s.step << ',' << ppo::format_double(s.inverse_confusion) << ','
          << ppo::format_double(s.reward) << '\n';
  }
  {
    std::ofstream out(out_dir / "correlation_summary.csv");
    out << "pearson_r,samples,runs\n";
    out << ppo::format_double(report.r) << ',' << report.samples.size() << ',' << run_dirs.size()
        << '\n';
  }
  // samples sorted by inverse confusion, drawn as one trace
  std::vector<analysis::CorrelationSample> sorted = report.samples;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.inverse_confusion < b.inverse_confusion; });
  ChartSeries series;
  series.name = "reward";
  for (const auto& s : sorted) {
    series.xs.push_back(s.inverse_confusion);
    series.ys.push_back(s.reward);
  }
  save_line_chart(out_dir / "correlation.svg", {series},
                  "reward vs inverse confusion (r=" + ppo::format_double(report.r) + ")",
                  "1/delta", "reward");
  std::cout << "pearson_r=" << ppo::format_double(report.r) << " samples=" << report.samples.size()
            << "\n";
  return out_dir;
}

fs::path cmd_analyze_spread(const analysis::SpreadConfig& cfg, const fs::path& out_dir) {
  analysis::SpreadReport report = analysis::spread_study(cfg);
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "spread.csv");
    out << "seed,spread_plain,spread_sparse,mae_plain,mae_sparse,delta_initial,delta_final,"
           "sharp_fraction,diverged\n";
    for (const auto& r : report.per_seed)
      out << r.seed << ',' << ppo::format_double(r.spread_plain) << ','
          << ppo::format_double(r.spread_sparse) << ',' << ppo::format_double(r.mae_plain) << ','
          << ppo::format_double(r.mae_sparse) << ',' << ppo::format_double(r.delta_initial) << ','
          << ppo::format_double(r.delta_final) << ',' << ppo::format_double(r.sharp_fraction)
          << ',' << (r.diverged ? 1 : 0) << '\n';
    out << "summary," << report.sparse_wins_spread << ',' << report.sparse_wins_mae << ",,,,,,\n";
  }
  ChartSeries plain{"spread plain", {}, {}}, sparse{"spread sparse", {}, {}};
  ChartSeries mp{"mae plain", {}, {}}, ms{"mae sparse", {}, {}};
  for (size_t i = 0; i < report.per_seed.size(); ++i) {
    plain.xs.push_back(double(i));
    plain.ys.push_back(report.per_seed[i].spread_plain);
    sparse.xs.push_back(double(i));
    sparse.ys.push_back(report.per_seed[i].spread_sparse);
    mp.xs.push_back(double(i));
    mp.ys.push_back(report.per_seed[i].mae_plain);
    ms.xs.push_back(double(i));
    ms.ys.push_back(report.per_seed[i].mae_sparse);
  }
  save_line_chart(out_dir / "spread.svg", {plain, sparse}, "cluster-mean spread per seed", "seed",
                  "spread");
  save_line_chart(out_dir / "mae.svg", {mp, ms}, "value prediction error per seed", "seed",
                  "mean |V - Vhat|");
  return out_dir;
}

fs::path cmd_analyze_partition(const fs::path& checkpoint, int samples, uint64_t seed,
                               const fs::path& out_dir) {
  ppo::LoadedCheckpoint ck = ppo::load_checkpoint(checkpoint);
  if (ck.net_config.clusters < 2)
    throw std::runtime_error("analyze partition: checkpoint " + checkpoint.string() +
                             " requires cluster head (mode " + ck.mode + " has a single head)");
  ppo::TrainConfig train_cfg = train_config_from_checkpoint(ck);
  envs::EnvSpec spec = train_cfg.env;
  spec.level_seeds = train_cfg.eval_level_seeds;

  fs::create_directories(out_dir);
  analysis::ClusterPartition part =
      analysis::partition_states(ck, spec, samples, seed, out_dir / "partition_dump.jsonl");
  {
    std::ofstream out(out_dir / "partition_clusters.csv");
    out << "cluster,states\n";
    for (size_t i = 0; i < part.cluster_sizes.size(); ++i)
      out << i << ',' << part.cluster_sizes[i] << '\n';
  }
  {
    std::ofstream out(out_dir / "partition_summary.csv");
    out << "total_states,sharp_fraction,chi_square,dof,p_value\n";
    out << part.total_states << ',' << ppo::format_double(part.sharp_fraction) << ','
        << ppo::format_double(part.label_association.statistic) << ','
        << part.label_association.dof << ','
        << ppo::format_double(part.label_association.p_value) << '\n';
  }
  ChartSeries sizes{"states per cluster", {}, {}};
  for (size_t i = 0; i < part.cluster_sizes.size(); ++i) {
    sizes.xs.push_back(double(i));
    sizes.ys.push_back(double(part.cluster_sizes[i]));
  }
  save_line_chart(out_dir / "partition.svg", {sizes}, "cluster occupancy", "cluster", "states");
  return out_dir;
}

fs::path cmd_analyze_efficiency(const std::vector<fs::path>& checkpoints, const EvalOptions& opt,
                                const fs::path& out_dir) {
  if (checkpoints.size() < 2)
    throw ConfigError({"analyze efficiency: need at least 2 checkpoints"});
  if (opt.episodes < 1) throw ConfigError({"analyze efficiency: episode count must be >= 1"});

  std::vector<std::pair<std::string, ppo::EvalResult>> per_mode;
  std::string env_name;
  std::vector<uint64_t> level_seeds;
  for (const fs::path& path : checkpoints) {
    ppo::LoadedCheckpoint ck = ppo::load_checkpoint(path);
    ppo::TrainConfig train_cfg = train_config_from_checkpoint(ck);
    if (env_name.empty()) {
      env_name = train_cfg.env.name;
      if (opt.levels.has_value() || opt.base_seed.has_value()) {
        const int n = opt.levels.value_or(int(train_cfg.eval_level_seeds.size()));
        level_seeds = envs::make_level_seeds(opt.base_seed.value_or(900000), n);
      } else {
        level_seeds = train_cfg.eval_level_seeds;
      }
    } else if (train_cfg.env.name != env_name) {
      throw std::runtime_error("analyze efficiency: modes evaluated on mismatched level sets (" +
                               env_name + " vs " + train_cfg.env.name + ")");
    }
    envs::EnvSpec spec = train_cfg.env;
    spec.level_seeds = level_seeds;
    per_mode.emplace_back(
        ck.mode, ppo::evaluate(*ck.net, spec, opt.episodes, opt.seed, train_cfg.gamma, /*greedy=*/true));
  }

  analysis::EfficiencyReport report = analysis::efficiency_report(per_mode);
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "efficiency.csv");
    out << "mode,mean_reward,mean_episode_length,mean_revisits\n";
    for (const auto& m : report.modes)
      out << m.mode << ',' << ppo::format_double(m.mean_reward) << ','
          << ppo::format_double(m.mean_length) << ',' << ppo::format_double(m.mean_revisits)
          << '\n';
  }
  {
    std::ofstream out(out_dir / "efficiency_episodes.csv");
    out << "mode,level_index,reward,length,revisits\n";
    for (const auto& e : report.episodes)
      out << e.mode << ',' << e.level_index << ',' << ppo::format_double(e.reward) << ','
          << e.length << ',' << e.revisits << '\n';
  }
  ChartSeries rew{"mean reward", {}, {}}, len{"mean length", {}, {}};
  for (size_t i = 0; i < report.modes.size(); ++i) {
    rew.xs.push_back(double(i));
    rew.ys.push_back(report.modes[i].mean_reward);
    len.xs.push_back(double(i));
    len.ys.push_back(report.modes[i].mean_length);
  }
  save_line_chart(out_dir / "efficiency_reward.svg", {rew}, "final reward by mode", "mode index",
                  "reward");
  save_line_chart(out_dir / "efficiency_length.svg", {len}, "episode length by mode", "mode index",
                  "length");
  return out_dir;
}

std::vector<fs::path> cmd_plot(const std::vector<fs::path>& csvs,
                               const std::vector<std::string>& columns, const fs::path& out_dir) {
  if (csvs.empty()) throw ConfigError({"plot: no input CSVs"});
  if (columns.empty()) throw ConfigError({"plot: no columns requested"});

  std::vector<std::pair<std::string, ppo::CsvTable>> tables;
  for (const fs::path& p : csvs) {
    ppo::CsvTable t = ppo::read_csv(p);
    if (t.rows.empty()) throw std::runtime_error("plot: " + p.string() + " has no data rows");
    std::string name = p.parent_path().filename().string();
    if (name.empty()) name = p.stem().string();
    tables.emplace_back(name, std::move(t));
  }
  // all inputs must share a schema
  for (size_t i = 1; i < tables.size(); ++i)
    if (tables[i].second.header != tables[0].second.header)
      throw std::runtime_error("plot: input CSVs do not share a schema");

  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const std::string& column : columns) {
    if (tables[0].second.column(column) < 0) {
      std::string available;
      for (const auto& h : tables[0].second.header) available += (available.empty() ? "" : ", ") + h;
      throw std::runtime_error("plot: unknown column '" + column + "' (available: " + available + ")");
    }
    std::vector<ChartSeries> series;
    for (auto& [name, table] : tables) {
      ChartSeries s;
      s.name = name;
      s.xs = table.numeric_column("step");
      s.ys = table.numeric_column(column);
      series.push_back(std::move(s));
    }
    const fs::path out = out_dir / (column + ".svg");
    save_line_chart(out, series, column, "step", column);
    written.push_back(out);
  }
  return written;
}

}  // namespace sdve::cli
