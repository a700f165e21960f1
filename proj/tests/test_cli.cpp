#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sdve/cli.hpp"
#include "sdve/manifest.hpp"
#include "sdve/metrics.hpp"
#include "sdve/svg_chart.hpp"

using namespace sdve;
using namespace sdve::cli;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_small_config(const fs::path& dir, const std::string& name,
                            const std::string& extra = "") {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << "# desk-scale smoke config\n"
         "mode = dve\n"
         "master_seed = 5\n"
         "env.name = corridor-coin\n"
         "env.levels = 8\n"
         "env.eval_levels = 4\n"
         "ppo.workers = 2\n"
         "ppo.segment_length = 16\n"
         "ppo.total_steps = 64\n"
         "ppo.epochs = 1\n"
         "ppo.minibatches = 1\n"
         "ppo.eval_interval = 2\n"
         "ppo.eval_episodes = 2\n"
         "net.encoder_size = 8\n"
         "net.lstm_size = 8\n"
      << extra;
  return p;
}

}  // namespace

TEST_CASE("config: defaults parse and validate") {
  RunConfig cfg;
  ppo::TrainConfig tc = cfg.to_train_config();
  CHECK(tc.mode == "dve");
  CHECK(tc.gamma == doctest::Approx(0.99));
  CHECK(tc.workers == 4);
  CHECK(tc.env.level_seeds.size() == 500);
  CHECK(tc.eval_level_seeds.size() == 50);
  CHECK(tc.cc.min_pretrain_steps == long(0.4 * 40960));
}

TEST_CASE("config: every violation is reported at once") {
  RunConfig cfg;
  cfg.set("mode", "bogus");
  cfg.set("ppo.gamma", "2.5");
  cfg.set("ppo.workers", "0");
  cfg.set("ppo.minibatches", "nine");
  cfg.set("no.such.key", "1");
  try {
    cfg.to_train_config();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.violations().size() >= 5);
    const std::string msg = e.what();
    CHECK(msg.find("mode") != std::string::npos);
    CHECK(msg.find("ppo.gamma") != std::string::npos);
    CHECK(msg.find("ppo.workers") != std::string::npos);
    CHECK(msg.find("ppo.minibatches") != std::string::npos);
    CHECK(msg.find("no.such.key") != std::string::npos);
  }
}

TEST_CASE("config: sparse-dve constraints") {
  RunConfig cfg;
  cfg.set("mode", "sparse-dve");
  cfg.set("ppo.gamma", "1.0");
  cfg.set("dve.n_clusters", "1");
  CHECK_THROWS_AS(cfg.to_train_config(), ConfigError);
}

TEST_CASE("config: canonical text is sorted, hash is stable, overrides apply") {
  RunConfig a;
  a.apply_override("ppo.gamma=0.98");
  RunConfig b;
  b.set("ppo.gamma", "0.98");
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(a.hash() == b.hash());
  RunConfig c;
  CHECK(c.hash() != a.hash());
  CHECK_THROWS_AS(a.apply_override("not-a-pair"), ConfigError);
}

TEST_CASE("config: run name derives from env, mode and seed") {
  RunConfig cfg;
  CHECK(cfg.run_name() == "corridor-coin-dve-s1");
  cfg.set("run.name", "custom");
  CHECK(cfg.run_name() == "custom");
}

TEST_CASE("manifest: round-trips and validates its hash") {
  const fs::path dir = fs::temp_directory_path() / "sdve_manifest_test";
  fs::create_directories(dir);
  RunManifest m;
  m.config_text = "mode=dve\n";
  m.config_hash = fnv1a64(m.config_text);
  m.master_seed = 9;
  m.mode = "dve";
  m.status = "complete";
  m.started_at = utc_timestamp();
  m.finished_at = utc_timestamp();
  m.artifacts = {"metrics.csv"};
  write_manifest(dir, m);
  RunManifest back = read_manifest(dir);
  CHECK(back.config_text == m.config_text);
  CHECK(back.mode == "dve");
  // corrupted hash is rejected
  m.config_hash ^= 1;
  write_manifest(dir, m);
  CHECK_THROWS(read_manifest(dir));
  fs::remove_all(dir);
}

TEST_CASE("cmd_train: produces the full artifact set and refuses to overwrite") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_train";
  fs::remove_all(base);
  const fs::path cfg = write_small_config(base, "run.cfg");
  const fs::path run_dir = cmd_train(cfg, {}, base / "run1", false);
  CHECK(fs::exists(run_dir / "manifest.json"));
  CHECK(fs::exists(run_dir / "config.cfg"));
  CHECK(fs::exists(run_dir / "metrics.csv"));
  CHECK(fs::exists(run_dir / "eval.csv"));
  CHECK(fs::exists(run_dir / "checkpoint.bin"));
  RunManifest m = read_manifest(run_dir);
  CHECK(m.status == "complete");
  CHECK(!m.finished_at.empty());

  CHECK_THROWS(cmd_train(cfg, {}, base / "run1", false));
  CHECK_NOTHROW(cmd_train(cfg, {}, base / "run1", true));
  fs::remove_all(base);
}

TEST_CASE("cmd_train: trajectory dumps are written on request") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_dump";
  fs::remove_all(base);
  const fs::path cfg = write_small_config(base, "run.cfg", "run.dump_trajectories = true\n");
  const fs::path run_dir = cmd_train(cfg, {}, base / "run", false);
  CHECK(fs::exists(run_dir / "trajectories.jsonl"));
  std::ifstream dump(run_dir / "trajectories.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(dump, line)) {
    CHECK(line.find("\"level\":") != std::string::npos);
    ++lines;
  }
  CHECK(lines > 0);
  fs::remove_all(base);
}

TEST_CASE("cmd_train: identical config and seed give byte-identical CSV outputs") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_det";
  fs::remove_all(base);
  const fs::path cfg = write_small_config(base, "run.cfg");
  const fs::path r1 = cmd_train(cfg, {}, base / "a", false);
  const fs::path r2 = cmd_train(cfg, {}, base / "b", false);
  CHECK(read_file(r1 / "metrics.csv") == read_file(r2 / "metrics.csv"));
  CHECK(read_file(r1 / "eval.csv") == read_file(r2 / "eval.csv"));
  CHECK(read_file(r1 / "checkpoint.bin") == read_file(r2 / "checkpoint.bin"));
  fs::remove_all(base);
}

TEST_CASE("cmd_train: dve with one cluster reproduces the rl2 value path") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_rl2";
  fs::remove_all(base);
  const fs::path cfg = write_small_config(base, "run.cfg");
  const fs::path r1 = cmd_train(cfg, {"mode=dve", "dve.n_clusters=1"}, base / "dve1", false);
  const fs::path r2 = cmd_train(cfg, {"mode=rl2"}, base / "rl2", false);
  ppo::CsvTable a = ppo::read_csv(r1 / "metrics.csv");
  ppo::CsvTable b = ppo::read_csv(r2 / "metrics.csv");
  REQUIRE(a.rows.size() == b.rows.size());
  for (const std::string& col : {std::string("mean_reward"), std::string("value_loss"),
                                 std::string("policy_loss"), std::string("mean_delta")})
    CHECK(a.numeric_column(col) == b.numeric_column(col));
  fs::remove_all(base);
}

TEST_CASE("manifest alone reproduces a run byte for byte") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_manifest_repro";
  fs::remove_all(base);
  const fs::path cfg = write_small_config(base, "run.cfg");
  const fs::path original = cmd_train(cfg, {}, base / "original", false);

  // rebuild the config purely from the stored manifest
  RunManifest m = read_manifest(original);
  const fs::path recovered_cfg = base / "recovered.cfg";
  {
    std::ofstream out(recovered_cfg);
    out << m.config_text;
  }
  const fs::path replay = cmd_train(recovered_cfg, {}, base / "replay", false);
  CHECK(read_file(original / "metrics.csv") == read_file(replay / "metrics.csv"));
  CHECK(read_file(original / "eval.csv") == read_file(replay / "eval.csv"));
  fs::remove_all(base);
}

TEST_CASE("partition: one cluster yields the single covering set; the CLI rejects rl2") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_partition";
  fs::remove_all(base);
  const fs::path cfg = write_small_config(base, "run.cfg");
  const fs::path run_dir = cmd_train(cfg, {"mode=rl2"}, base / "run", false);

  ppo::LoadedCheckpoint ck = ppo::load_checkpoint(run_dir / "checkpoint.bin");
  envs::EnvSpec spec;
  spec.name = "corridor-coin";
  spec.level_seeds = envs::make_level_seeds(900000, 4);
  auto part = analysis::partition_states(ck, spec, 200, 7, "");
  REQUIRE(part.cluster_sizes.size() == 1);
  CHECK(part.cluster_sizes[0] == part.total_states);  // one set containing all states

  try {
    cmd_analyze_partition(run_dir / "checkpoint.bin", 100, 7, base / "part");
    FAIL("expected error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("cluster head") != std::string::npos);
  }
  fs::remove_all(base);
}

TEST_CASE("cmd_eval: writes reports, flags training-set overlap, rejects empty episode counts") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_eval";
  fs::remove_all(base);
  const fs::path cfg = write_small_config(base, "run.cfg");
  const fs::path run_dir = cmd_train(cfg, {}, base / "run", false);

  EvalOptions opt;
  opt.episodes = 3;
  const fs::path out = cmd_eval(run_dir / "checkpoint.bin", opt, base / "eval");
  ppo::CsvTable report = ppo::read_csv(out / "eval_report.csv");
  REQUIRE(report.rows.size() == 1);
  CHECK(report.numeric_column("train_overlap")[0] == 0.0);
  CHECK(report.numeric_column("episodes")[0] == 3.0);
  ppo::CsvTable episodes = ppo::read_csv(out / "eval_episodes.csv");
  CHECK(episodes.rows.size() == 3);

  // evaluating on the training levels themselves must flag the overlap
  EvalOptions overlap_opt;
  overlap_opt.episodes = 2;
  overlap_opt.levels = 8;
  overlap_opt.base_seed = 1000;  // equals env.base_seed of the training run
  const fs::path out2 = cmd_eval(run_dir / "checkpoint.bin", overlap_opt, base / "eval2");
  CHECK(ppo::read_csv(out2 / "eval_report.csv").numeric_column("train_overlap")[0] == 1.0);

  EvalOptions bad;
  bad.episodes = 0;
  CHECK_THROWS_AS(cmd_eval(run_dir / "checkpoint.bin", bad, base / "eval3"), ConfigError);
  fs::remove_all(base);
}

TEST_CASE("cmd_eval: repeated evaluation is byte-identical") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_eval_det";
  fs::remove_all(base);
  const fs::path cfg = write_small_config(base, "run.cfg");
  const fs::path run_dir = cmd_train(cfg, {}, base / "run", false);
  EvalOptions opt;
  opt.episodes = 4;
  const fs::path o1 = cmd_eval(run_dir / "checkpoint.bin", opt, base / "e1");
  const fs::path o2 = cmd_eval(run_dir / "checkpoint.bin", opt, base / "e2");
  CHECK(read_file(o1 / "eval_report.csv") == read_file(o2 / "eval_report.csv"));
  CHECK(read_file(o1 / "eval_episodes.csv") == read_file(o2 / "eval_episodes.csv"));
  fs::remove_all(base);
}

TEST_CASE("cmd_analyze_spread: one row per seed plus a summary row, and charts") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_spread";
  fs::remove_all(base);
  analysis::SpreadConfig cfg;
  cfg.seeds = 2;
  cfg.levels = 8;
  cfg.chain_length = 4;
  cfg.iters = 60;
  const fs::path out = cmd_analyze_spread(cfg, base / "spread");
  ppo::CsvTable table = ppo::read_csv(out / "spread.csv");
  CHECK(table.rows.size() == 3);  // 2 seeds + summary
  CHECK(table.rows.back()[0] == "summary");
  CHECK(fs::exists(out / "spread.svg"));
  CHECK(fs::exists(out / "mae.svg"));
  fs::remove_all(base);
}

TEST_CASE("plot: one SVG per column with one polyline per run") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_plot";
  fs::remove_all(base);
  fs::create_directories(base);
  for (int r = 0; r < 3; ++r) {
    fs::create_directories(base / ("run" + std::to_string(r)));
    ppo::MetricsWriter w(base / ("run" + std::to_string(r)) / "metrics.csv", 2);
    for (int i = 1; i <= 10; ++i) {
      ppo::MetricsRow row;
      row.step = i * 10;
      row.mode = "dve";
      row.mean_reward = double(i + r);
      row.rho = {0.5, 0.5};
      w.write(row);
    }
  }
  auto files = cmd_plot({base / "run0" / "metrics.csv", base / "run1" / "metrics.csv",
                         base / "run2" / "metrics.csv"},
                        {"mean_reward"}, base / "plots");
  REQUIRE(files.size() == 1);
  const std::string svg = read_file(files[0]);
  size_t count = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++count;
    pos += 1;
  }
  CHECK(count == 3);
  fs::remove_all(base);
}

TEST_CASE("plot: unknown columns and empty CSVs are errors") {
  const fs::path base = fs::temp_directory_path() / "sdve_cli_plot_err";
  fs::remove_all(base);
  fs::create_directories(base);
  {
    ppo::MetricsWriter w(base / "metrics.csv", 2);
    ppo::MetricsRow row;
    row.step = 1;
    row.mode = "dve";
    row.rho = {0.5, 0.5};
    w.write(row);
  }
  try {
    cmd_plot({base / "metrics.csv"}, {"no_such_column"}, base / "plots");
    FAIL("expected error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("available") != std::string::npos);
  }
  {
    std::ofstream empty(base / "empty.csv");
    empty << "step,mode\n";
  }
  CHECK_THROWS(cmd_plot({base / "empty.csv"}, {"step"}, base / "plots"));
  fs::remove_all(base);
}

TEST_CASE("svg chart: a monotone series maps to monotone pixel coordinates") {
  ChartSeries s;
  s.name = "y=x";
  for (int i = 0; i <= 10; ++i) {
    s.xs.push_back(double(i));
    s.ys.push_back(double(i));
  }
  const std::string svg = render_line_chart({s}, "monotone", "x", "y");
  const size_t start = svg.find("points=\"");
  REQUIRE(start != std::string::npos);
  const size_t end = svg.find('"', start + 8);
  std::stringstream points(svg.substr(start + 8, end - start - 8));
  std::string pair;
  double prev_y = 1e18;
  int parsed = 0;
  while (points >> pair) {
    const size_t comma = pair.find(',');
    REQUIRE(comma != std::string::npos);
    const double y = std::stod(pair.substr(comma + 1));
    CHECK(y < prev_y);  // SVG y axis points down: rising data means falling pixels
    prev_y = y;
    ++parsed;
  }
  CHECK(parsed == 11);
}

TEST_CASE("svg chart: empty input is an error") {
  CHECK_THROWS(render_line_chart({}, "t", "x", "y"));
  ChartSeries s;
  s.name = "empty";
  CHECK_THROWS(render_line_chart({s}, "t", "x", "y"));
}
