#pragma once

#include "sdve/chain_oracle.hpp"
#include "sdve/env.hpp"

namespace sdve::envs {

struct EnvSpec {
  std::string name = "corridor-coin";  // corridor-coin | fruit-line | chain-oracle
  std::vector<uint64_t> level_seeds;
  ChainOracleConfig chain;  // used only by chain-oracle
};

std::vector<uint64_t> make_level_seeds(uint64_t base_seed, int count);
std::unique_ptr<MultiSceneEnv> make_env(const EnvSpec& spec);

// Exact true value for the oracle environment; any other env is an error.
double oracle_true_value(const MultiSceneEnv& env, int level_index, int position, double gamma);

}  // namespace sdve::envs
