#include "sdve/rollout.hpp"

namespace sdve::ppo {

std::vector<std::pair<int, int>> SegmentData::trajectory_ranges() const {
  std::vector<std::pair<int, int>> ranges;
  int start = 0;
  for (int t = 0; t < length(); ++t) {
    if (dones[size_t(t)]) {
      ranges.emplace_back(start, t + 1);
      start = t + 1;
    }
  }
  if (start < length()) ranges.emplace_back(start, length());
  return ranges;
}

int RolloutBuffer::total_steps() const {
  int n = 0;
  for (const SegmentData& s : segments) n += s.length();
  return n;
}

}  // namespace sdve::ppo
