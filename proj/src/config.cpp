#include "sdve/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace sdve::cli {

namespace {

constexpr ConfigKey kRegistry[] = {
    {"mode", "enum", "dve", "training mode: rl2 | dve | sparse-dve"},
    {"master_seed", "u64", "1", "seed controlling every random stream of the run"},
    {"run.name", "string", "", "run directory name; derived from env/mode/seed when empty"},
    {"run.dump_trajectories", "bool", "false", "write trajectories.jsonl from the final policy"},
    {"env.name", "enum", "corridor-coin", "environment: corridor-coin | fruit-line | chain-oracle"},
    {"env.levels", "int", "500", "number of training levels"},
    {"env.base_seed", "u64", "1000", "base seed the training level seeds derive from"},
    {"env.level_seeds", "u64list", "", "explicit comma-separated level seeds (overrides levels/base_seed)"},
    {"env.eval_levels", "int", "50", "number of held-out evaluation levels"},
    {"env.eval_base_seed", "u64", "900000", "base seed for held-out evaluation levels"},
    {"env.chain.length", "int", "8", "chain-oracle: chain length"},
    {"env.chain.step_cap", "int", "0", "chain-oracle: episode step cap (0 = 4x length)"},
    {"env.chain.group_means", "dlist", "2,10", "chain-oracle: terminal-reward mixture component means"},
    {"env.chain.group_sigma", "double", "0.5", "chain-oracle: within-component reward spread"},
    {"env.chain.signpost_noise", "double", "0.25", "chain-oracle: signpost observation noise"},
    {"ppo.gamma", "double", "0.99", "discount factor, in (0, 1]; sparse-dve requires < 1"},
    {"ppo.lambda", "double", "0.95", "advantage estimation lambda, in [0, 1]"},
    {"ppo.clip", "double", "0.2", "surrogate clipping radius"},
    {"ppo.entropy_coef", "double", "0.01", "entropy bonus coefficient"},
    {"ppo.value_coef", "double", "0.5", "value loss coefficient"},
    {"ppo.learning_rate", "double", "3e-4", "Adam learning rate"},
    {"ppo.workers", "int", "4", "parallel rollout workers"},
    {"ppo.segment_length", "int", "64", "steps per worker per update"},
    {"ppo.epochs", "int", "3", "optimization epochs per update"},
    {"ppo.minibatches", "int", "2", "minibatches per epoch (whole segments; must be <= workers)"},
    {"ppo.total_steps", "long", "40960", "total environment steps"},
    {"ppo.eval_interval", "int", "10", "updates between held-out evaluations"},
    {"ppo.eval_episodes", "int", "16", "episodes per held-out evaluation"},
    {"net.encoder_size", "int", "32", "feature MLP width"},
    {"net.lstm_size", "int", "64", "LSTM hidden size"},
    {"dve.n_clusters", "int", "3", "value clusters (1..8); rl2 always uses 1"},
    {"dve.k1", "double", "0.05", "confusion coefficient"},
    {"dve.k2", "double", "0.05", "contribution coefficient"},
    {"dve.eps_log", "double", "1e-8", "numeric guard inside both logs"},
    {"dve.boost_mode", "enum", "pre", "when to apply the sparsity loss: pre | post"},
    {"dve.ramp_fraction", "double", "0.25", "pre mode: ramp 0->1 over this fraction of total steps"},
    {"dve.post_window", "int", "5", "post mode: evaluation windows in the slope fit"},
    {"dve.post_slope_threshold", "double", "1.0", "post mode: trigger when episode-length slope falls below"},
    {"dve.post_pretrain_fraction", "double", "0.4", "post mode: never trigger before this fraction of total steps"},
    {"dve.cc_assignments_only", "bool", "true", "restrict sparsity-loss gradients to the assignment head"},
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  try {
    size_t idx = 0;
    out = std::stod(s, &idx);
    return idx == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_long(const std::string& s, long& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_u64(const std::string& s, uint64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::span<const ConfigKey> config_registry() { return kRegistry; }

RunConfig::RunConfig() {
  for (const ConfigKey& k : kRegistry) values_[k.name] = k.default_value;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> errors;
  while (std::getline(ss, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected key=value, got '" + line + "'");
      continue;
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

void RunConfig::apply_override(const std::string& kv) {
  const size_t eq = kv.find('=');
  if (eq == std::string::npos)
    throw ConfigError({"override '" + kv + "' is not of the form key=value"});
  set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  return it->second;
}

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t RunConfig::hash() const { return fnv1a64(canonical_text()); }

std::string RunConfig::run_name() const {
  const std::string name = values_.at("run.name");
  if (!name.empty()) return name;
  return values_.at("env.name") + "-" + values_.at("mode") + "-s" + values_.at("master_seed");
}

ppo::TrainConfig RunConfig::to_train_config() const {
  std::vector<std::string> errors;
  auto fail = [&](const std::string& msg) { errors.push_back(msg); };

  // unknown keys
  for (const auto& [k, _] : values_) {
    const bool known = std::any_of(std::begin(kRegistry), std::end(kRegistry),
                                   [&](const ConfigKey& reg) { return reg.name == k; });
    if (!known) fail("unknown key '" + k + "'");
  }

  auto get_s = [&](const char* key) { return values_.at(key); };
  auto get_d = [&](const char* key, double fallback) {
    double v = fallback;
    if (!parse_double(get_s(key), v)) fail(std::string(key) + ": not a number ('" + get_s(key) + "')");
    return v;
  };
  auto get_i = [&](const char* key, long fallback) {
    long v = fallback;
    if (!parse_long(get_s(key), v)) fail(std::string(key) + ": not an integer ('" + get_s(key) + "')");
    return v;
  };
  auto get_u = [&](const char* key, uint64_t fallback) {
    uint64_t v = fallback;
    if (!parse_u64(get_s(key), v))
      fail(std::string(key) + ": not an unsigned integer ('" + get_s(key) + "')");
    return v;
  };
  auto get_b = [&](const char* key, bool fallback) {
    bool v = fallback;
    if (!parse_bool(get_s(key), v)) fail(std::string(key) + ": not a boolean ('" + get_s(key) + "')");
    return v;
  };

  ppo::TrainConfig cfg;
  cfg.mode = get_s("mode");
  if (cfg.mode != "rl2" && cfg.mode != "dve" && cfg.mode != "sparse-dve")
    fail("mode: must be rl2, dve or sparse-dve (got '" + cfg.mode + "')");
  cfg.master_seed = get_u("master_seed", 1);

  cfg.env.name = get_s("env.name");
  if (cfg.env.name != "corridor-coin" && cfg.env.name != "fruit-line" && cfg.env.name != "chain-oracle")
    fail("env.name: must be corridor-coin, fruit-line or chain-oracle (got '" + cfg.env.name + "')");

  const long levels = get_i("env.levels", 500);
  if (levels < 1) fail("env.levels: must be >= 1");
  const uint64_t base_seed = get_u("env.base_seed", 1000);
  const std::string explicit_seeds = get_s("env.level_seeds");
  if (!explicit_seeds.empty()) {
    for (const std::string& item : split_list(explicit_seeds)) {
      uint64_t v = 0;
      if (!parse_u64(item, v))
        fail("env.level_seeds: '" + item + "' is not an unsigned integer");
      else
        cfg.env.level_seeds.push_back(v);
    }
    if (cfg.env.level_seeds.empty()) fail("env.level_seeds: empty list");
  } else if (levels >= 1) {
    cfg.env.level_seeds = envs::make_level_seeds(base_seed, int(levels));
  }

  const long eval_levels = get_i("env.eval_levels", 50);
  if (eval_levels < 1) fail("env.eval_levels: must be >= 1");
  const uint64_t eval_base = get_u("env.eval_base_seed", 900000);
  if (eval_levels >= 1) cfg.eval_level_seeds = envs::make_level_seeds(eval_base, int(eval_levels));

  cfg.env.chain.length = int(get_i("env.chain.length", 8));
  if (cfg.env.chain.length < 2) fail("env.chain.length: must be >= 2");
  cfg.env.chain.step_cap = int(get_i("env.chain.step_cap", 0));
  if (cfg.env.chain.step_cap < 0) fail("env.chain.step_cap: must be >= 0");
  cfg.env.chain.group_sigma = get_d("env.chain.group_sigma", 0.5);
  if (cfg.env.chain.group_sigma < 0) fail("env.chain.group_sigma: must be >= 0");
  cfg.env.chain.signpost_noise = get_d("env.chain.signpost_noise", 0.25);
  if (cfg.env.chain.signpost_noise < 0) fail("env.chain.signpost_noise: must be >= 0");
  cfg.env.chain.group_means.clear();
  for (const std::string& item : split_list(get_s("env.chain.group_means"))) {
    double v = 0;
    if (!parse_double(item, v))
      fail("env.chain.group_means: '" + item + "' is not a number");
    else
      cfg.env.chain.group_means.push_back(v);
  }
  if (cfg.env.chain.group_means.empty()) fail("env.chain.group_means: empty list");

  cfg.gamma = get_d("ppo.gamma", 0.99);
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) fail("ppo.gamma: must be in (0, 1]");
  cfg.gae_lambda = get_d("ppo.lambda", 0.95);
  if (!(cfg.gae_lambda >= 0.0 && cfg.gae_lambda <= 1.0)) fail("ppo.lambda: must be in [0, 1]");
  cfg.clip = get_d("ppo.clip", 0.2);
  if (!(cfg.clip > 0.0)) fail("ppo.clip: must be > 0");
  cfg.entropy_coef = get_d("ppo.entropy_coef", 0.01);
  if (cfg.entropy_coef < 0.0) fail("ppo.entropy_coef: must be >= 0");
  cfg.value_coef = get_d("ppo.value_coef", 0.5);
  if (cfg.value_coef < 0.0) fail("ppo.value_coef: must be >= 0");
  cfg.learning_rate = get_d("ppo.learning_rate", 3e-4);
  if (!(cfg.learning_rate > 0.0)) fail("ppo.learning_rate: must be > 0");
  cfg.workers = int(get_i("ppo.workers", 4));
  if (cfg.workers < 1) fail("ppo.workers: must be >= 1");
  cfg.segment_length = int(get_i("ppo.segment_length", 64));
  if (cfg.segment_length < 1) fail("ppo.segment_length: must be >= 1");
  cfg.epochs = int(get_i("ppo.epochs", 3));
  if (cfg.epochs < 1) fail("ppo.epochs: must be >= 1");
  cfg.minibatches = int(get_i("ppo.minibatches", 2));
  if (cfg.minibatches < 1) fail("ppo.minibatches: must be >= 1");
  if (cfg.minibatches > cfg.workers) fail("ppo.minibatches: must be <= ppo.workers");
  cfg.total_steps = get_i("ppo.total_steps", 40960);
  if (cfg.total_steps < long(cfg.workers) * cfg.segment_length)
    fail("ppo.total_steps: below one update (workers * segment_length)");
  cfg.eval_interval = int(get_i("ppo.eval_interval", 10));
  if (cfg.eval_interval < 1) fail("ppo.eval_interval: must be >= 1");
  cfg.eval_episodes = int(get_i("ppo.eval_episodes", 16));
  if (cfg.eval_episodes < 1) fail("ppo.eval_episodes: must be >= 1");

  cfg.encoder_size = int(get_i("net.encoder_size", 32));
  if (cfg.encoder_size < 1) fail("net.encoder_size: must be >= 1");
  cfg.lstm_size = int(get_i("net.lstm_size", 64));
  if (cfg.lstm_size < 1) fail("net.lstm_size: must be >= 1");

  cfg.n_clusters = int(get_i("dve.n_clusters", 3));
  if (cfg.n_clusters < 1 || cfg.n_clusters > 8) fail("dve.n_clusters: must be in [1, 8]");
  if (cfg.mode == "sparse-dve" && cfg.n_clusters < 2)
    fail("dve.n_clusters: sparse-dve requires at least 2 clusters");
  if (cfg.mode == "sparse-dve" && cfg.gamma >= 1.0)
    fail("ppo.gamma: sparse-dve requires gamma < 1");

  cfg.cc.k1 = get_d("dve.k1", 0.05);
  if (cfg.cc.k1 < 0.0) fail("dve.k1: must be >= 0");
  cfg.cc.k2 = get_d("dve.k2", 0.05);
  if (cfg.cc.k2 < 0.0) fail("dve.k2: must be >= 0");
  cfg.cc.eps_log = get_d("dve.eps_log", 1e-8);
  if (cfg.cc.eps_log < 0.0) fail("dve.eps_log: must be >= 0");
  const std::string boost_mode = get_s("dve.boost_mode");
  if (boost_mode == "pre")
    cfg.cc.mode = dve::BoostMode::kPre;
  else if (boost_mode == "post")
    cfg.cc.mode = dve::BoostMode::kPost;
  else
    fail("dve.boost_mode: must be pre or post (got '" + boost_mode + "')");
  cfg.cc.ramp_fraction = get_d("dve.ramp_fraction", 0.25);
  if (!(cfg.cc.ramp_fraction > 0.0 && cfg.cc.ramp_fraction <= 1.0))
    fail("dve.ramp_fraction: must be in (0, 1]");
  cfg.cc.window = int(get_i("dve.post_window", 5));
  if (cfg.cc.window < 2) fail("dve.post_window: must be >= 2");
  cfg.cc.slope_threshold = get_d("dve.post_slope_threshold", 1.0);
  const double pretrain_frac = get_d("dve.post_pretrain_fraction", 0.4);
  if (!(pretrain_frac >= 0.0 && pretrain_frac < 1.0))
    fail("dve.post_pretrain_fraction: must be in [0, 1)");
  cfg.cc.min_pretrain_steps = long(pretrain_frac * double(cfg.total_steps));
  cfg.cc.total_steps = cfg.total_steps;
  cfg.cc_assignments_only = get_b("dve.cc_assignments_only", true);
  cfg.dump_trajectories = get_b("run.dump_trajectories", false);

  if (!errors.empty()) throw ConfigError(std::move(errors));

  cfg.config_snapshot = canonical_text();
  cfg.config_hash = hash();
  return cfg;
}

}  // namespace sdve::cli
