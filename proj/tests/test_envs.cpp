#include <cmath>
#include <set>

#include "doctest.h"
#include "sdve/chain_oracle.hpp"
#include "sdve/corridor_coin.hpp"
#include "sdve/env_factory.hpp"
#include "sdve/fruit_line.hpp"

using namespace sdve;
using namespace sdve::envs;

namespace {

// Reactive corridor player driven purely by the observation vector.
int corridor_policy(const std::vector<double>& obs) {
  const double spike = obs[0], overhang = obs[1], saw = obs[2], saw_on = obs[3];
  if (spike > 0.5) return CorridorCoinEnv::kJump;
  if (overhang > 0.5) return CorridorCoinEnv::kDuck;
  if (saw > 0.5) return saw_on > 0.5 ? CorridorCoinEnv::kWalk : CorridorCoinEnv::kWait;
  return CorridorCoinEnv::kWalk;
}

}  // namespace

TEST_CASE("reset: a single configured level is always chosen") {
  CorridorCoinEnv env(std::vector<uint64_t>{42});
  numerics::Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    env.reset(rng);
    CHECK(env.current_level_id() == 0);
  }
}

TEST_CASE("reset: empty level set is an error") {
  EnvSpec spec;
  spec.name = "corridor-coin";
  CHECK_THROWS(make_env(spec));
  CorridorCoinEnv env(std::vector<CorridorLayout>{});
  numerics::Rng rng(1);
  CHECK_THROWS(env.reset(rng));
}

TEST_CASE("reset: 10000 draws over 500 levels stay within 3 sigma of uniform") {
  EnvSpec spec;
  spec.name = "chain-oracle";
  spec.level_seeds = make_level_seeds(1000, 500);
  auto env = make_env(spec);
  numerics::Rng rng(2026);
  std::vector<int> counts(500, 0);
  for (int i = 0; i < 10000; ++i) {
    env->reset(rng);
    counts[size_t(env->current_level_id())]++;
  }
  // binomial: mean 20, sigma = sqrt(10000 * (1/500) * (499/500)) = 4.468
  const double mean = 20.0, sigma = std::sqrt(10000.0 * (1.0 / 500.0) * (499.0 / 500.0));
  for (int c : counts) {
    CHECK(c >= mean - 3.0 * sigma);
    CHECK(c <= mean + 3.0 * sigma);
  }
}

TEST_CASE("reset: the same master seed reproduces the level sequence") {
  auto draw = [] {
    CorridorCoinEnv env(make_level_seeds(7, 50));
    numerics::Rng rng(99);
    std::vector<int> ids;
    for (int i = 0; i < 40; ++i) {
      env.reset(rng);
      ids.push_back(env.current_level_id());
    }
    return ids;
  };
  CHECK(draw() == draw());
}

TEST_CASE("corridor generator: hazards are spaced and within bounds") {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    CorridorLayout lay = generate_corridor_layout(seed);
    CHECK(lay.length >= 12);
    CHECK(lay.length <= 20);
    int prev = -10;
    int hazards = 0;
    for (int c = 0; c < lay.length; ++c) {
      if (lay.hazard_family[size_t(c)] == kNoHazard) continue;
      ++hazards;
      CHECK(c >= 4);
      CHECK(c <= lay.length - 4);
      CHECK(c - prev >= 3);
      CHECK(lay.hazard_family[size_t(c)] >= 0);
      CHECK(lay.hazard_family[size_t(c)] <= 2);
      prev = c;
    }
    CHECK(hazards >= 1);
  }
}

TEST_CASE("corridor: the reactive policy solves every generated level") {
  CorridorCoinEnv env(make_level_seeds(31337, 100));
  for (int lvl = 0; lvl < 100; ++lvl) {
    std::vector<double> obs = env.reset_level(lvl);
    double total = 0.0;
    bool done = false;
    int steps = 0;
    while (!done) {
      auto sr = env.step(corridor_policy(obs));
      total += sr.reward;
      obs = sr.observation;
      done = sr.done;
      ++steps;
      REQUIRE(steps <= CorridorCoinEnv::kEpisodeCap);
    }
    CHECK(total == doctest::Approx(CorridorCoinEnv::kCoinReward));
  }
}

TEST_CASE("corridor: reaching the coin pays +10 and ends the episode") {
  CorridorLayout lay;
  lay.length = 16;
  lay.hazard_family.assign(16, kNoHazard);
  lay.saw_phase.assign(16, 0);
  CorridorCoinEnv env(std::vector<CorridorLayout>{lay});
  env.reset_level(0);
  StepResult sr;
  for (int i = 0; i < 15; ++i) sr = env.step(CorridorCoinEnv::kWalk);
  CHECK(sr.reward == doctest::Approx(10.0));
  CHECK(sr.done);
}

TEST_CASE("corridor: walking into a hazard ends the episode with no reward") {
  CorridorLayout lay;
  lay.length = 16;
  lay.hazard_family.assign(16, kNoHazard);
  lay.saw_phase.assign(16, 0);
  lay.hazard_family[2] = kSpike;
  CorridorCoinEnv env(std::vector<CorridorLayout>{lay});
  env.reset_level(0);
  env.step(CorridorCoinEnv::kWalk);            // -> cell 1
  auto sr = env.step(CorridorCoinEnv::kWalk);  // -> spike
  CHECK(sr.reward == doctest::Approx(0.0));
  CHECK(sr.done);
}

TEST_CASE("step: acting after done or with a bad action is an error") {
  CorridorCoinEnv env(make_level_seeds(5, 3));
  numerics::Rng rng(1);
  env.reset(rng);
  CHECK_THROWS(env.step(17));
  std::vector<double> obs = env.reset(rng);
  bool done = false;
  while (!done) {
    auto sr = env.step(corridor_policy(obs));
    obs = sr.observation;
    done = sr.done;
  }
  CHECK_THROWS(env.step(0));
}

TEST_CASE("determinism: seed plus action sequence fixes every trajectory") {
  auto roll = [] {
    EnvSpec spec;
    spec.name = "fruit-line";
    spec.level_seeds = make_level_seeds(11, 20);
    auto env = make_env(spec);
    numerics::Rng rng(3);
    std::vector<double> trace;
    env->reset(rng);
    uint64_t s = 77;
    for (int i = 0; i < 300; ++i) {
      const int a = int(numerics::splitmix64(s) % 3);
      auto sr = env->step(a);
      trace.push_back(sr.reward);
      trace.push_back(double(sr.level_id));
      trace.insert(trace.end(), sr.observation.begin(), sr.observation.end());
      if (sr.done) env->reset(rng);
    }
    return trace;
  };
  CHECK(roll() == roll());
}

TEST_CASE("level blindness: layouts identical inside the window give bit-identical observations") {
  SUBCASE("corridor") {
    CorridorLayout a;
    a.length = 20;
    a.hazard_family.assign(20, kNoHazard);
    a.saw_phase.assign(20, 0);
    a.hazard_family[10] = kSpike;
    CorridorLayout b = a;
    b.hazard_family[10] = kOverhang;  // beyond the 3-cell lookahead from cell 0
    CorridorCoinEnv ea(std::vector<CorridorLayout>{a});
    CorridorCoinEnv eb(std::vector<CorridorLayout>{b});
    std::vector<double> oa = ea.reset_level(0);
    std::vector<double> ob = eb.reset_level(0);
    CHECK(oa == ob);  // exact bit equality
    for (int i = 0; i < 6; ++i) {
      auto sa = ea.step(CorridorCoinEnv::kWalk);
      auto sb = eb.step(CorridorCoinEnv::kWalk);
      CHECK(sa.observation == sb.observation);
    }
  }
  SUBCASE("chain oracle: the reward is invisible until the end") {
    ChainLevel la{8, 3.0, 0.42};
    ChainLevel lb{8, 9.0, 0.42};  // same layout (length, signpost), different reward
    ChainOracleEnv ea({la});
    ChainOracleEnv eb({lb});
    CHECK(ea.reset_level(0) == eb.reset_level(0));
    for (int i = 0; i < 6; ++i) {
      auto sa = ea.step(ChainOracleEnv::kAdvance);
      auto sb = eb.step(ChainOracleEnv::kAdvance);
      CHECK(sa.observation == sb.observation);
      CHECK(sa.reward == sb.reward);  // zero until terminal
    }
  }
  SUBCASE("fruit line: columns beyond the lookahead are invisible") {
    std::vector<FruitColumn> a(12), b(12);
    a[10].barrier[0] = true;  // differs only at column 10
    FruitLineEnv ea(std::vector<std::vector<FruitColumn>>{a});
    FruitLineEnv eb(std::vector<std::vector<FruitColumn>>{b});
    CHECK(ea.reset_level(0) == eb.reset_level(0));
    for (int i = 0; i < 4; ++i) {
      auto sa = ea.step(FruitLineEnv::kStay);
      auto sb = eb.step(FruitLineEnv::kStay);
      if (i < 5) CHECK(sa.observation == sb.observation);
    }
  }
}

TEST_CASE("chain oracle: non-terminal transitions pay zero") {
  ChainOracleEnv env({ChainLevel{5, 7.0, 0.1}});
  env.reset_level(0);
  for (int i = 0; i < 3; ++i) {
    auto sr = env.step(ChainOracleEnv::kAdvance);
    CHECK(sr.reward == 0.0);
    CHECK(!sr.done);
  }
}

TEST_CASE("chain oracle: true_value formula") {
  ChainOracleEnv env({ChainLevel{3, 10.0, 0.0}});
  SUBCASE("one step from the end: gamma^0 * r") {
    CHECK(env.true_value(0, 2, 0.9) == doctest::Approx(10.0));
  }
  SUBCASE("hand-evaluated gamma^2 * r") {
    CHECK(env.true_value(0, 0, 0.9) == doctest::Approx(8.1).epsilon(1e-12));
  }
  SUBCASE("undiscounted chain: value is r everywhere") {
    for (int k = 0; k < 3; ++k) CHECK(env.true_value(0, k, 1.0) == doctest::Approx(10.0));
  }
}

TEST_CASE("chain oracle: true_value on a non-oracle env is an error") {
  CorridorCoinEnv env(make_level_seeds(5, 2));
  CHECK_THROWS(oracle_true_value(env, 0, 0, 0.99));
}

TEST_CASE("chain oracle: Monte-Carlo returns under the optimal policy match true_value") {
  const double gamma = 0.97;
  ChainOracleEnv env({ChainLevel{9, 4.25, 0.3}});
  env.reset_level(0);
  std::vector<double> rewards;
  bool done = false;
  while (!done) {
    auto sr = env.step(ChainOracleEnv::kAdvance);
    rewards.push_back(sr.reward);
    done = sr.done;
  }
  REQUIRE(rewards.size() == 9);  // 8 advances to the last cell, then the terminal move
  double ret = 0.0;
  for (int k = int(rewards.size()) - 1; k >= 0; --k) {
    ret = rewards[size_t(k)] + gamma * ret;
    CHECK(ret == doctest::Approx(env.true_value(0, k, gamma)).epsilon(1e-9));
  }
}

TEST_CASE("episode return: discounted never exceeds undiscounted for nonnegative rewards") {
  EnvSpec spec;
  spec.name = "corridor-coin";
  spec.level_seeds = make_level_seeds(77, 30);
  auto env = make_env(spec);
  numerics::Rng rng(8);
  uint64_t s = 5;
  for (int ep = 0; ep < 20; ++ep) {
    env->reset(rng);
    EpisodeReturn er;
    double discount = 1.0;
    bool done = false;
    while (!done) {
      auto sr = env->step(int(numerics::splitmix64(s) % 4));
      er.undiscounted += sr.reward;
      er.discounted += discount * sr.reward;
      discount *= 0.99;
      er.length += 1;
      done = sr.done;
    }
    CHECK(er.length >= 1);
    CHECK(er.discounted <= er.undiscounted + 1e-12);
  }
}

TEST_CASE("fruit line: generated levels always keep a survivable lane chain") {
  for (uint64_t seed = 1; seed <= 60; ++seed) {
    FruitColumnStream stream(seed);
    // DP over reachable safe lanes; the generator's hidden path guarantees
    // this never empties
    std::set<int> reachable;
    const FruitColumn& c0 = stream.column(0);
    for (int lane = 0; lane < 3; ++lane)
      if (!c0.barrier[lane]) reachable.insert(lane);
    for (int col = 1; col <= FruitLineEnv::kEpisodeCap; ++col) {
      const FruitColumn& c = stream.column(col);
      std::set<int> next;
      for (int lane : reachable)
        for (int d = -1; d <= 1; ++d) {
          const int nl = lane + d;
          if (nl >= 0 && nl < 3 && !c.barrier[nl]) next.insert(nl);
        }
      REQUIRE(!next.empty());
      reachable = next;
    }
  }
}

TEST_CASE("fruit line: fruit pays +1, barriers end the episode") {
  std::vector<FruitColumn> cols(6);
  cols[1].fruit[1] = true;
  cols[2].barrier[1] = true;
  FruitLineEnv env(std::vector<std::vector<FruitColumn>>{cols});
  env.reset_level(0);
  auto sr = env.step(FruitLineEnv::kStay);  // column 1: fruit on the agent's lane
  CHECK(sr.reward == doctest::Approx(1.0));
  CHECK(!sr.done);
  sr = env.step(FruitLineEnv::kStay);  // column 2: barrier on the agent's lane
  CHECK(sr.reward == doctest::Approx(0.0));
  CHECK(sr.done);
}

TEST_CASE("fruit line: at most one fruit per column and never on a barrier") {
  FruitColumnStream stream(12345);
  for (int col = 0; col <= 500; ++col) {
    const FruitColumn& c = stream.column(col);
    int fruit = 0;
    for (int lane = 0; lane < 3; ++lane) {
      fruit += c.fruit[lane];
      CHECK(!(c.fruit[lane] && c.barrier[lane]));
    }
    CHECK(fruit <= 1);
  }
}
