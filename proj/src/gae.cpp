#include <stdexcept>

#include "sdve/rollout.hpp"

namespace sdve::ppo {

void compute_gae(SegmentData& seg, double gamma, double lambda) {
  const int n = seg.length();
  if (n == 0) throw std::invalid_argument("compute_gae: empty segment");
  if (!seg.dones[size_t(n - 1)] && !seg.bootstrap_value.has_value())
    throw std::invalid_argument("compute_gae: missing bootstrap value for truncated segment");

  seg.advantages.assign(size_t(n), 0.0);
  seg.returns.assign(size_t(n), 0.0);
  double acc = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double not_done = seg.dones[size_t(t)] ? 0.0 : 1.0;
    const double next_v = (t == n - 1) ? seg.bootstrap_value.value_or(0.0) : seg.values[size_t(t + 1)];
    const double td = seg.rewards[size_t(t)] + gamma * next_v * not_done - seg.values[size_t(t)];
    acc = td + gamma * lambda * not_done * acc;
    seg.advantages[size_t(t)] = acc;
    seg.returns[size_t(t)] = acc + seg.values[size_t(t)];
  }
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda) {
  for (SegmentData& seg : buffer.segments) compute_gae(seg, gamma, lambda);
}

}  // namespace sdve::ppo
