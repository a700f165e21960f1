#include <iostream>

#include "CLI11.hpp"
#include "sdve/cli.hpp"

using namespace sdve;

int main(int argc, char** argv) {
  CLI::App app{"sparse dynamic value estimation: training, evaluation and analysis"};
  app.require_subcommand(1);

  // train
  std::string train_config;
  std::vector<std::string> train_sets;
  std::string train_out;
  bool train_resume = false;
  CLI::App* train = app.add_subcommand("train", "train a policy from a config file");
  train->add_option("--config", train_config, "run config file (key=value lines)")->required();
  train->add_option("--set", train_sets, "override, e.g. --set ppo.gamma=0.98 (repeatable)");
  train->add_option("--out", train_out, "run directory (default: $SPARSE_DVE_RUNS_DIR/<name>)");
  train->add_flag("--resume", train_resume, "allow writing into an existing run directory");

  // eval
  std::string eval_ckpt, eval_out = "eval_out";
  cli::EvalOptions eval_opt;
  int eval_levels = -1;
  long long eval_base = -1;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on held-out levels");
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--levels", eval_levels, "held-out level count");
  eval->add_option("--base-seed", eval_base, "held-out level base seed");
  eval->add_option("--episodes", eval_opt.episodes, "episodes to run (default 32)");
  eval->add_option("--seed", eval_opt.seed, "evaluation action-sampling seed");
  eval->add_option("--out", eval_out, "output directory");

  // analyze
  CLI::App* analyze = app.add_subcommand("analyze", "run a verification study");
  analyze->require_subcommand(1);

  std::vector<std::string> corr_runs;
  double corr_window = 1.0;
  std::string corr_out = "correlation_out";
  CLI::App* corr = analyze->add_subcommand("correlation", "confusion/reward correlation across runs");
  corr->add_option("--run", corr_runs, "run directory (repeat for each run, >= 4)")->required();
  corr->add_option("--window-frac", corr_window, "use the first fraction of each run's steps");
  corr->add_option("--out", corr_out, "output directory");

  analysis::SpreadConfig spread_cfg;
  std::string spread_out = "spread_out";
  CLI::App* spread = analyze->add_subcommand("spread", "cluster-mean spread study on the oracle chain");
  spread->add_option("--seeds", spread_cfg.seeds, "number of seeds (default 5)");
  spread->add_option("--levels", spread_cfg.levels, "levels in the regression dataset");
  spread->add_option("--iters", spread_cfg.iters, "fit iterations");
  spread->add_option("--signpost-noise", spread_cfg.signpost_noise, "signpost observation noise");
  spread->add_option("--k1", spread_cfg.k1, "confusion coefficient");
  spread->add_option("--k2", spread_cfg.k2, "contribution coefficient");
  spread->add_option("--base-seed", spread_cfg.base_seed, "base seed");
  spread->add_option("--out", spread_out, "output directory");

  std::string part_ckpt, part_out = "partition_out";
  int part_samples = 4000;
  uint64_t part_seed = 99;
  CLI::App* part = analyze->add_subcommand("partition", "argmax cluster partition of visited states");
  part->add_option("--checkpoint", part_ckpt, "trained sparse-dve checkpoint")->required();
  part->add_option("--samples", part_samples, "states to sample");
  part->add_option("--seed", part_seed, "rollout seed");
  part->add_option("--out", part_out, "output directory");

  std::vector<std::string> eff_ckpts;
  cli::EvalOptions eff_opt;
  int eff_levels = -1;
  long long eff_base = -1;
  std::string eff_out = "efficiency_out";
  CLI::App* eff = analyze->add_subcommand("efficiency", "reward/length comparison across modes");
  eff->add_option("--checkpoint", eff_ckpts, "checkpoint per mode (repeat, >= 2)")->required();
  eff->add_option("--episodes", eff_opt.episodes, "episodes per checkpoint");
  eff->add_option("--levels", eff_levels, "held-out level count");
  eff->add_option("--base-seed", eff_base, "held-out level base seed");
  eff->add_option("--seed", eff_opt.seed, "evaluation action-sampling seed");
  eff->add_option("--out", eff_out, "output directory");

  // plot
  std::vector<std::string> plot_csvs, plot_columns;
  std::string plot_out = "plots";
  CLI::App* plot = app.add_subcommand("plot", "render SVG line charts from metrics CSVs");
  plot->add_option("--csv", plot_csvs, "metrics CSV (repeatable; one line per file)")->required();
  plot->add_option("--column", plot_columns, "column to chart (repeatable; one SVG per column)")
      ->required();
  plot->add_option("--out", plot_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto dir = cli::cmd_train(train_config, train_sets, train_out, train_resume);
      std::cout << dir.string() << "\n";
    } else if (*eval) {
      if (eval_levels >= 0) eval_opt.levels = eval_levels;
      if (eval_base >= 0) eval_opt.base_seed = uint64_t(eval_base);
      auto dir = cli::cmd_eval(eval_ckpt, eval_opt, eval_out);
      std::cout << dir.string() << "\n";
    } else if (*corr) {
      std::vector<std::filesystem::path> dirs(corr_runs.begin(), corr_runs.end());
      auto dir = cli::cmd_analyze_correlation(dirs, corr_window, corr_out);
      std::cout << dir.string() << "\n";
    } else if (*spread) {
      auto dir = cli::cmd_analyze_spread(spread_cfg, spread_out);
      std::cout << dir.string() << "\n";
    } else if (*part) {
      auto dir = cli::cmd_analyze_partition(part_ckpt, part_samples, part_seed, part_out);
      std::cout << dir.string() << "\n";
    } else if (*eff) {
      if (eff_levels >= 0) eff_opt.levels = eff_levels;
      if (eff_base >= 0) eff_opt.base_seed = uint64_t(eff_base);
      std::vector<std::filesystem::path> ckpts(eff_ckpts.begin(), eff_ckpts.end());
      auto dir = cli::cmd_analyze_efficiency(ckpts, eff_opt, eff_out);
      std::cout << dir.string() << "\n";
    } else if (*plot) {
      std::vector<std::filesystem::path> csvs(plot_csvs.begin(), plot_csvs.end());
      auto files = cli::cmd_plot(csvs, plot_columns, plot_out);
      for (const auto& f : files) std::cout << f.string() << "\n";
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
