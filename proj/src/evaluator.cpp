#include "sdve/evaluator.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "sdve/cluster.hpp"
#include "sdve/stats.hpp"

namespace sdve::ppo {

PolicyStepper::PolicyStepper(const PolicyValueNet& net)
    : net_(net), h_(net.zero_hidden()), c_(net.zero_hidden()) {}

void PolicyStepper::reset_hidden() {
  h_.fill(0.0);
  c_.fill(0.0);
}

PolicyStepper::Out PolicyStepper::forward(const std::vector<double>& obs) {
  numerics::Tape tape;
  auto ctx = net_.lease(tape);
  auto fwd = net_.forward(tape, ctx, tape.leaf(obs), tape.leaf(h_), tape.leaf(c_));
  Out out;
  out.log_policy = tape.value(fwd.log_policy).data;
  out.alpha = tape.value(fwd.alpha).data;
  out.means = tape.value(fwd.means).data;
  out.value = tape.value(fwd.value)[0];
  h_ = tape.value(fwd.h);
  c_ = tape.value(fwd.c);
  return out;
}

int count_revisits(envs::MultiSceneEnv& env, const std::vector<int>& actions) {
  std::unordered_set<long> seen;
  seen.insert(env.discrete_state_id());
  int revisits = 0;
  for (int a : actions) {
    auto sr = env.step(a);
    if (sr.done) break;
    if (!seen.insert(env.discrete_state_id()).second) ++revisits;
  }
  return revisits;
}

EvalResult evaluate(const PolicyValueNet& net, const envs::EnvSpec& spec, int episodes,
                    uint64_t seed, double gamma, bool greedy) {
  if (episodes <= 0) throw std::invalid_argument("evaluate: episode count must be positive");
  auto env = envs::make_env(spec);
  numerics::Rng rng(seed);
  PolicyStepper stepper(net);

  EvalResult res;
  res.level_seeds = spec.level_seeds;
  const int n_clusters = net.config().clusters;
  res.mean_rho.assign(size_t(n_clusters), 0.0);
  std::vector<double> max_alphas;
  double delta_sum = 0.0;
  long step_count = 0;

  for (int e = 0; e < episodes; ++e) {
    const int level = e % env->level_count();
    std::vector<double> obs = env->reset_level(level);
    stepper.reset_hidden();
    EpisodeRecord rec;
    rec.level_index = level;
    std::unordered_set<long> seen;
    seen.insert(env->discrete_state_id());
    std::vector<std::vector<double>> episode_alphas;
    double discount = 1.0;
    bool done = false;
    while (!done) {
      auto out = stepper.forward(obs);
      int action = 0;
      if (greedy) {
        for (size_t i = 1; i < out.log_policy.size(); ++i)
          if (out.log_policy[i] > out.log_policy[size_t(action)]) action = int(i);
      } else {
        std::vector<double> probs(out.log_policy.size());
        for (size_t i = 0; i < probs.size(); ++i) probs[i] = std::exp(out.log_policy[i]);
        action = rng.categorical(probs);
      }

      delta_sum += dve::confusion(out.alpha);
      max_alphas.push_back(*std::max_element(out.alpha.begin(), out.alpha.end()));
      episode_alphas.push_back(out.alpha);
      ++step_count;

      auto sr = env->step(action);
      rec.undiscounted += sr.reward;
      rec.discounted += discount * sr.reward;
      discount *= gamma;
      ++rec.length;
      done = sr.done;
      if (!done) {
        obs = sr.observation;
        const long sid = env->discrete_state_id();
        if (!seen.insert(sid).second) ++rec.revisits;
      }
    }
    const std::vector<double> rho = dve::contribution(episode_alphas);
    for (int i = 0; i < n_clusters; ++i) res.mean_rho[size_t(i)] += rho[size_t(i)];
    res.episodes.push_back(rec);
  }

  for (double& r : res.mean_rho) r /= double(episodes);
  double rew = 0.0, len = 0.0;
  for (const auto& rec : res.episodes) {
    rew += rec.undiscounted;
    len += rec.length;
  }
  res.mean_reward = rew / double(episodes);
  res.mean_length = len / double(episodes);
  res.mean_delta = delta_sum / double(step_count);
  res.max_alpha_p50 = analysis::percentile(max_alphas, 0.5);
  res.max_alpha_p90 = analysis::percentile(max_alphas, 0.9);
  return res;
}

}  // namespace sdve::ppo
