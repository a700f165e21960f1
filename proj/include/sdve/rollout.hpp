#pragma once

#include <optional>
#include <vector>

#include "sdve/env.hpp"
#include "sdve/policy_net.hpp"

namespace sdve::ppo {

// One worker's fixed-length slice of experience. Segment boundaries may cut
// episodes; done flags mark in-segment episode ends and the stored initial
// hidden state lets updates re-run the recurrent forward pass exactly.
struct SegmentData {
  int worker = 0;
  std::vector<std::vector<double>> obs;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<uint8_t> dones;
  std::vector<double> values;
  std::vector<std::vector<double>> alphas;
  std::vector<int> level_ids;
  std::vector<double> h0, c0;            // hidden state at segment start
  std::optional<double> bootstrap_value; // value of the state after the last step
  std::vector<double> advantages;
  std::vector<double> returns;
  // episodes completed inside this segment
  std::vector<double> episode_returns;
  std::vector<int> episode_lengths;

  int length() const { return int(actions.size()); }
  // steps split at episode boundaries; truncated heads/tails count as trajectories
  std::vector<std::pair<int, int>> trajectory_ranges() const;
};

struct RolloutBuffer {
  std::vector<SegmentData> segments;
  int total_steps() const;
};

// A = sum_k (gamma*lambda)^k * td_k, cut at episode boundaries;
// returns = A + V. The bootstrap value must be present when the segment
// does not end an episode.
void compute_gae(SegmentData& seg, double gamma, double lambda);
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

}  // namespace sdve::ppo
