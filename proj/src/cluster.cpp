#include "sdve/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdve/stats.hpp"

namespace sdve::dve {

namespace {

void require_simplex(std::span<const double> alpha) {
  if (alpha.empty()) throw std::invalid_argument("cluster: empty assignment vector");
  double sum = 0.0;
  for (double a : alpha) {
    if (a < -kSimplexTol) throw std::invalid_argument("cluster: negative assignment weight");
    sum += a;
  }
  if (std::fabs(sum - 1.0) > kSimplexTol)
    throw std::invalid_argument("cluster: assignment weights do not sum to 1");
}

}  // namespace

double combine(std::span<const double> alpha, std::span<const double> means) {
  require_simplex(alpha);
  if (alpha.size() != means.size())
    throw std::invalid_argument("combine: alpha/means length mismatch");
  double v = 0.0;
  for (size_t i = 0; i < alpha.size(); ++i) v += alpha[i] * means[i];
  return v;
}

double confusion(std::span<const double> alpha) {
  require_simplex(alpha);
  double ss = 0.0;
  for (double a : alpha) ss += a * a;
  return 1.0 / (double(alpha.size()) * ss);
}

std::vector<double> contribution(const std::vector<std::vector<double>>& trajectory_alphas) {
  if (trajectory_alphas.empty()) throw std::invalid_argument("contribution: empty trajectory");
  const size_t n = trajectory_alphas.front().size();
  std::vector<double> rho(n, 0.0);
  for (const auto& alpha : trajectory_alphas) {
    if (alpha.size() != n) throw std::invalid_argument("contribution: inconsistent cluster count");
    const double delta = confusion(alpha);
    for (size_t i = 0; i < n; ++i) rho[i] += delta * alpha[i];
  }
  const double inv_t = 1.0 / double(trajectory_alphas.size());
  for (double& r : rho) r *= inv_t;
  return rho;
}

numerics::Tape::Id cc_loss(numerics::Tape& tape,
                           const std::vector<std::vector<numerics::Tape::Id>>& trajectories,
                           double k1, double k2, double eps_log) {
  using Id = numerics::Tape::Id;
  if (k1 < 0.0 || k2 < 0.0) throw std::invalid_argument("cc_loss: coefficients must be >= 0");
  if (trajectories.empty()) throw std::invalid_argument("cc_loss: empty batch");
  for (const auto& traj : trajectories)
    if (traj.empty()) throw std::invalid_argument("cc_loss: empty trajectory in batch");

  const int n_clusters = tape.value(trajectories.front().front()).size();
  long total_steps = 0;
  Id log_delta_sum = tape.scalar_leaf(0.0);
  Id traj_term_sum = tape.scalar_leaf(0.0);

  for (const auto& traj : trajectories) {
    Id rho_acc = tape.leaf(numerics::Tensor({n_clusters}, 0.0));
    for (Id alpha : traj) {
      Id sq_sum = tape.dot(alpha, alpha);
      Id delta = tape.scale(tape.reciprocal(sq_sum), 1.0 / double(n_clusters));
      log_delta_sum = tape.add(log_delta_sum, tape.log_op(delta, eps_log));
      rho_acc = tape.add(rho_acc, tape.smul(alpha, delta));
      ++total_steps;
    }
    Id rho = tape.scale(rho_acc, 1.0 / double(traj.size()));
    Id rho_sq = tape.dot(rho, rho);
    traj_term_sum = tape.add(traj_term_sum, tape.log_op(rho_sq, eps_log));
  }

  Id confusion_term = tape.scale(log_delta_sum, k1 / double(total_steps));
  Id contribution_term = tape.scale(traj_term_sum, k2 / double(trajectories.size()));
  return tape.add(confusion_term, contribution_term);
}

double boost_coefficient(long step, std::span<const double> episode_length_history,
                         const CCLossConfig& cfg) {
  if (step < 0) throw std::invalid_argument("boost_coefficient: negative step");
  if (cfg.mode == BoostMode::kPre) {
    if (cfg.total_steps <= 0) throw std::invalid_argument("boost_coefficient: total_steps not set");
    const double ramp_len = cfg.ramp_fraction * double(cfg.total_steps);
    if (ramp_len <= 0.0) return 1.0;
    return std::min(1.0, double(step) / ramp_len);
  }
  // post mode
  if (int(episode_length_history.size()) < cfg.window) return 0.0;
  if (step < cfg.min_pretrain_steps) return 0.0;
  const auto tail = episode_length_history.subspan(episode_length_history.size() - size_t(cfg.window));
  return analysis::least_squares_slope(tail) < cfg.slope_threshold ? 1.0 : 0.0;
}

double BoostScheduler::scale(long step, std::span<const double> episode_length_history) {
  if (cfg_.mode == BoostMode::kPost && latched_) return 1.0;
  const double s = boost_coefficient(step, episode_length_history, cfg_);
  if (cfg_.mode == BoostMode::kPost && s >= 1.0) latched_ = true;
  return s;
}

}  // namespace sdve::dve
