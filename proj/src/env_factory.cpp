#include "sdve/env_factory.hpp"

#include <stdexcept>

#include "sdve/corridor_coin.hpp"
#include "sdve/fruit_line.hpp"

namespace sdve::envs {

std::vector<double> MultiSceneEnv::reset(numerics::Rng& rng) {
  if (level_count() == 0) throw std::invalid_argument("MultiSceneEnv::reset: empty level set");
  return reset_level(rng.uniform_int(level_count()));
}

std::vector<uint64_t> make_level_seeds(uint64_t base_seed, int count) {
  if (count <= 0) throw std::invalid_argument("make_level_seeds: count must be positive");
  std::vector<uint64_t> seeds;
  seeds.reserve(size_t(count));
  uint64_t s = base_seed;
  for (int i = 0; i < count; ++i) seeds.push_back(numerics::splitmix64(s));
  return seeds;
}

std::unique_ptr<MultiSceneEnv> make_env(const EnvSpec& spec) {
  if (spec.level_seeds.empty()) throw std::invalid_argument("make_env: empty level set");
  if (spec.name == "corridor-coin") return std::make_unique<CorridorCoinEnv>(spec.level_seeds);
  if (spec.name == "fruit-line") return std::make_unique<FruitLineEnv>(spec.level_seeds);
  if (spec.name == "chain-oracle") return std::make_unique<ChainOracleEnv>(spec.level_seeds, spec.chain);
  throw std::invalid_argument("make_env: unknown environment '" + spec.name + "'");
}

double oracle_true_value(const MultiSceneEnv& env, int level_index, int position, double gamma) {
  const auto* oracle = dynamic_cast<const ChainOracleEnv*>(&env);
  if (!oracle) throw std::invalid_argument("oracle_true_value: environment has no analytic value function");
  return oracle->true_value(level_index, position, gamma);
}

}  // namespace sdve::envs
