#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sdve/analysis.hpp"
#include "sdve/chain_oracle.hpp"
#include "sdve/evaluator.hpp"
#include "sdve/metrics.hpp"
#include "sdve/stats.hpp"

using namespace sdve;
using namespace sdve::analysis;
namespace fs = std::filesystem;

TEST_CASE("pearson: perfect linear relation gives 1") {
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pearson: perfect anti-linear relation gives -1") {
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{6, 4, 2}) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson: hand-computed 0.5 case") {
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pearson: degenerate inputs are errors") {
  CHECK_THROWS(pearson(std::vector<double>{1.0}, std::vector<double>{2.0}));
  CHECK_THROWS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}));
  CHECK_THROWS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}));
}

TEST_CASE("pearson: symmetric, bounded, invariant under positive affine maps") {
  numerics::Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + rng.uniform_int(20);
    std::vector<double> x(static_cast<size_t>(n), 0.0), y(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      x[size_t(i)] = rng.uniform(-5.0, 5.0);
      y[size_t(i)] = rng.uniform(-5.0, 5.0);
    }
    const double r = pearson(x, y);
    CHECK(r >= -1.0 - 1e-12);
    CHECK(r <= 1.0 + 1e-12);
    CHECK(pearson(y, x) == doctest::Approx(r).epsilon(1e-12));
    const double a = rng.uniform(0.1, 3.0), b = rng.uniform(-10.0, 10.0);
    std::vector<double> xs = x;
    for (double& v : xs) v = a * v + b;
    CHECK(pearson(xs, y) == doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("least_squares_slope: exact on linear data, zero on flat data") {
  CHECK(least_squares_slope(std::vector<double>{1, 3, 5, 7}) == doctest::Approx(2.0));
  CHECK(least_squares_slope(std::vector<double>{4, 4, 4}) == doctest::Approx(0.0));
}

TEST_CASE("chi-square: matches tabulated critical values") {
  // chi2 = 3.841459, dof 1 -> p = 0.05
  CHECK(gamma_q(0.5, 3.841459 / 2.0) == doctest::Approx(0.05).epsilon(1e-4));
  // chi2 = 12.591587, dof 6 -> p = 0.05
  CHECK(gamma_q(3.0, 12.591587 / 2.0) == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("chi-square independence: detects association and its absence") {
  // strong association
  ChiSquareResult strong = chi_square_independence({{90, 10}, {10, 90}});
  CHECK(strong.dof == 1);
  CHECK(strong.p_value < 1e-6);
  // perfectly proportional table: statistic 0
  ChiSquareResult none = chi_square_independence({{30, 60}, {10, 20}});
  CHECK(none.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(none.p_value == doctest::Approx(1.0).epsilon(1e-9));
  // degenerate: single live row
  ChiSquareResult degen = chi_square_independence({{5, 5}, {0, 0}});
  CHECK(degen.dof == 0);
  CHECK(degen.p_value == doctest::Approx(1.0));
}

namespace {

// synthetic run directory with a dve metrics.csv
void write_run(const fs::path& dir, int rows, uint64_t seed,
               double (*reward_of)(double delta, numerics::Rng& rng)) {
  fs::create_directories(dir);
  ppo::MetricsWriter writer(dir / "metrics.csv", 3);
  numerics::Rng rng(seed);
  for (int i = 0; i < rows; ++i) {
    ppo::MetricsRow row;
    row.step = (i + 1) * 100;
    row.mode = "dve";
    row.mean_delta = rng.uniform(0.4, 1.0);
    row.mean_reward = reward_of(row.mean_delta, rng);
    row.rho = {0.3, 0.3, 0.3};
    writer.write(row);
  }
}

}  // namespace

TEST_CASE("correlation study: reward exactly 2/delta gives r = 1") {
  const fs::path base = fs::temp_directory_path() / "sdve_corr_exact";
  fs::remove_all(base);
  for (int r = 0; r < 4; ++r)
    write_run(base / ("run" + std::to_string(r)), 50, uint64_t(r + 1),
              [](double delta, numerics::Rng&) { return 2.0 / delta; });
  auto report = confusion_reward_study(
      {base / "run0", base / "run1", base / "run2", base / "run3"}, 1.0);
  CHECK(report.r == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.samples.size() == 200);
  fs::remove_all(base);
}

TEST_CASE("correlation study: independent reward stays near zero") {
  const fs::path base = fs::temp_directory_path() / "sdve_corr_null";
  fs::remove_all(base);
  for (int r = 0; r < 4; ++r)
    write_run(base / ("run" + std::to_string(r)), 250, uint64_t(100 + r),
              [](double, numerics::Rng& rng) { return rng.uniform(0.0, 10.0); });
  auto report = confusion_reward_study(
      {base / "run0", base / "run1", base / "run2", base / "run3"}, 1.0);
  CHECK(std::fabs(report.r) < 0.1);
  CHECK(report.samples.size() == 1000);
  fs::remove_all(base);
}

TEST_CASE("correlation study: fewer than 4 runs or an empty window is an error") {
  const fs::path base = fs::temp_directory_path() / "sdve_corr_err";
  fs::remove_all(base);
  for (int r = 0; r < 4; ++r)
    write_run(base / ("run" + std::to_string(r)), 10, uint64_t(r + 7),
              [](double delta, numerics::Rng&) { return delta; });
  CHECK_THROWS(confusion_reward_study({base / "run0", base / "run1"}, 1.0));
  CHECK_THROWS(confusion_reward_study(
      {base / "run0", base / "run1", base / "run2", base / "run3"}, 0.0));
  fs::remove_all(base);
}

TEST_CASE("correlation study: sparse runs are rejected") {
  const fs::path base = fs::temp_directory_path() / "sdve_corr_mode";
  fs::remove_all(base);
  for (int r = 0; r < 3; ++r)
    write_run(base / ("run" + std::to_string(r)), 10, uint64_t(r + 7),
              [](double delta, numerics::Rng&) { return delta; });
  {
    fs::create_directories(base / "run3");
    ppo::MetricsWriter writer(base / "run3" / "metrics.csv", 3);
    ppo::MetricsRow row;
    row.step = 100;
    row.mode = "sparse-dve";
    row.mean_delta = 0.5;
    row.mean_reward = 1.0;
    row.rho = {0.3, 0.3, 0.3};
    writer.write(row);
  }
  CHECK_THROWS(confusion_reward_study(
      {base / "run0", base / "run1", base / "run2", base / "run3"}, 1.0));
  fs::remove_all(base);
}

TEST_CASE("spread study: a single shared value function is fit well by both variants") {
  SpreadConfig cfg;
  cfg.levels = 16;
  cfg.chain_length = 6;
  cfg.group_means = {5.0};
  cfg.group_sigma = 0.0;
  cfg.signpost_noise = 0.1;
  cfg.signpost_fraction = 1.0;
  cfg.weight_decay = 0.0;
  cfg.iters = 500;
  cfg.seeds = 1;
  auto report = spread_study(cfg);
  REQUIRE(report.per_seed.size() == 1);
  const auto& r = report.per_seed[0];
  CHECK(!r.diverged);
  CHECK(r.mae_plain < 0.15);
  CHECK(r.mae_sparse < 0.15);
  // confusion bounds hold for the sparse fit
  CHECK(r.delta_final >= 1.0 / cfg.n_clusters - 1e-9);
  CHECK(r.delta_final <= 1.0 + 1e-9);
}

TEST_CASE("spread study: sparse fit beats plain on spread and error at the default config") {
  SpreadConfig cfg;
  cfg.seeds = 2;
  auto report = spread_study(cfg);
  for (const auto& r : report.per_seed) {
    CHECK(!r.diverged);
    CHECK(r.spread_sparse > r.spread_plain);
    CHECK(r.mae_sparse < r.mae_plain);
    CHECK(r.delta_final < r.delta_initial);
  }
}

TEST_CASE("spread study: two clean well-separated groups produce sharp, group-aligned clusters") {
  SpreadConfig cfg;
  cfg.signpost_fraction = 1.0;
  cfg.signpost_noise = 0.15;
  cfg.k1 = 20.0;
  cfg.k2 = 2.0;
  cfg.seeds = 2;
  auto report = spread_study(cfg);
  for (const auto& r : report.per_seed) {
    CHECK(!r.diverged);
    CHECK(r.sharp_fraction >= 0.9);  // max alpha >= 0.9 on >= 90% of states
    CHECK(r.delta_final < r.delta_initial);
    // the selected cluster's mean lands near each group's analytic value
    // average (per-group regression oracle)
    REQUIRE(r.selected_mean_by_group.size() == 2);
    REQUIRE(r.group_value_avg.size() == 2);
    const double gap = std::fabs(r.group_value_avg[0] - r.group_value_avg[1]);
    for (size_t g = 0; g < 2; ++g)
      CHECK(std::fabs(r.selected_mean_by_group[g] - r.group_value_avg[g]) < 0.25 * gap);
  }
}

TEST_CASE("efficiency report: identical inputs give identical rows") {
  ppo::EvalResult ev;
  ev.level_seeds = {1, 2, 3};
  ev.mean_reward = 5.0;
  ev.mean_length = 20.0;
  ev.episodes = {{0, 5.0, 4.5, 20, 1}};
  auto report = efficiency_report({{"dve", ev}, {"dve", ev}});
  REQUIRE(report.modes.size() == 2);
  CHECK(report.modes[0].mean_reward == report.modes[1].mean_reward);
  CHECK(report.modes[0].mean_length == report.modes[1].mean_length);
  CHECK(report.modes[0].mean_revisits == report.modes[1].mean_revisits);
}

TEST_CASE("efficiency report: mismatched level sets are an error") {
  ppo::EvalResult a, b;
  a.level_seeds = {1, 2, 3};
  b.level_seeds = {4, 5, 6};
  a.episodes = b.episodes = {{0, 1.0, 1.0, 5, 0}};
  CHECK_THROWS(efficiency_report({{"dve", a}, {"rl2", b}}));
  CHECK_THROWS(efficiency_report({{"dve", a}}));  // needs >= 2 modes
}

TEST_CASE("revisits: a scripted noop revisits one state exactly once") {
  envs::ChainOracleEnv env({envs::ChainLevel{5, 1.0, 0.0}});
  env.reset_level(0);
  const int advance = envs::ChainOracleEnv::kAdvance;
  const int noop = envs::ChainOracleEnv::kNoop;
  CHECK(ppo::count_revisits(env, {advance, noop, advance}) == 1);
  env.reset_level(0);
  CHECK(ppo::count_revisits(env, {advance, advance, advance}) == 0);
}
