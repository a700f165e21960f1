#include "sdve/fruit_line.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdve::envs {

FruitLineStyle fruit_line_style(uint64_t seed) {
  uint64_t s = seed ^ 0x5eedf00dULL;
  FruitLineStyle st;
  st.barrier_prob = 0.15 + 0.25 * (double(numerics::splitmix64(s) % 1000) / 1000.0);
  st.fruit_prob = 0.20 + 0.30 * (double(numerics::splitmix64(s) % 1000) / 1000.0);
  st.start_path_lane = int(numerics::splitmix64(s) % 3);
  return st;
}

FruitColumnStream::FruitColumnStream(uint64_t seed)
    : seed_(seed), style_(fruit_line_style(seed)), path_lane_(style_.start_path_lane) {
  cache_.push_back(FruitColumn{});  // column 0 under the spawn point is empty
}

const FruitColumn& FruitColumnStream::column(int index) {
  if (index < 0) throw std::invalid_argument("FruitColumnStream::column: negative index");
  while (size_t(index) >= cache_.size()) {
    const int j = int(cache_.size());
    uint64_t s = seed_ ^ (0x9e3779b97f4a7c15ULL * uint64_t(j));
    FruitColumn colm;
    const int drift = int(numerics::splitmix64(s) % 3) - 1;
    path_lane_ = std::clamp(path_lane_ + drift, 0, FruitLineEnv::kLanes - 1);
    for (int lane = 0; lane < FruitLineEnv::kLanes; ++lane) {
      if (lane == path_lane_) continue;
      const double u = double(numerics::splitmix64(s) % 100000) / 100000.0;
      colm.barrier[lane] = u < style_.barrier_prob;
    }
    for (int lane = 0; lane < FruitLineEnv::kLanes; ++lane) {
      if (colm.barrier[lane]) continue;
      const double u = double(numerics::splitmix64(s) % 100000) / 100000.0;
      if (u < style_.fruit_prob) {
        colm.fruit[lane] = true;
        break;  // at most one fruit per column
      }
    }
    cache_.push_back(colm);
  }
  return cache_[size_t(index)];
}

FruitLineEnv::FruitLineEnv(const std::vector<uint64_t>& level_seeds) : seeds_(level_seeds) {}

FruitLineEnv::FruitLineEnv(std::vector<std::vector<FruitColumn>> levels)
    : fixed_levels_(std::move(levels)) {}

int FruitLineEnv::level_count() const {
  return fixed_levels_.empty() ? int(seeds_.size()) : int(fixed_levels_.size());
}

std::vector<double> FruitLineEnv::reset_level(int level_index) {
  if (level_index < 0 || level_index >= level_count())
    throw std::invalid_argument("FruitLineEnv::reset_level: level index out of range");
  level_ = level_index;
  col_ = 0;
  if (fixed_levels_.empty()) {
    stream_ = std::make_unique<FruitColumnStream>(seeds_[size_t(level_index)]);
    lane_ = fruit_line_style(seeds_[size_t(level_index)]).start_path_lane;
  } else {
    stream_.reset();
    lane_ = 1;
  }
  active_ = true;
  return observation();
}

const FruitColumn& FruitLineEnv::column(int index) {
  if (!fixed_levels_.empty()) {
    static const FruitColumn kEmpty{};
    const auto& cols = fixed_levels_[size_t(level_)];
    if (size_t(index) >= cols.size()) return kEmpty;
    return cols[size_t(index)];
  }
  return stream_->column(index);
}

StepResult FruitLineEnv::step(int action) {
  if (!active_) throw std::logic_error("FruitLineEnv::step: episode not active (reset first)");
  if (action < 0 || action >= action_count())
    throw std::invalid_argument("FruitLineEnv::step: invalid action index");

  if (action == kUp) lane_ = std::min(lane_ + 1, kLanes - 1);
  if (action == kDown) lane_ = std::max(lane_ - 1, 0);
  ++col_;

  StepResult out;
  out.level_id = level_;
  const FruitColumn& c = column(col_);
  if (c.barrier[lane_]) {
    out.reward = 0.0;
    out.done = true;
  } else {
    if (c.fruit[lane_]) out.reward = 1.0;
    if (col_ >= kEpisodeCap) out.done = true;
  }
  if (out.done) active_ = false;
  out.observation = out.done ? std::vector<double>(size_t(observation_size()), 0.0) : observation();
  return out;
}

std::vector<double> FruitLineEnv::observation() {
  std::vector<double> obs;
  obs.reserve(size_t(observation_size()));
  for (int d = 1; d <= kLookahead; ++d) {
    const FruitColumn& c = column(col_ + d);
    for (int lane = 0; lane < kLanes; ++lane) {
      obs.push_back(c.fruit[lane] ? 1.0 : 0.0);
      obs.push_back(c.barrier[lane] ? 1.0 : 0.0);
    }
  }
  for (int lane = 0; lane < kLanes; ++lane) obs.push_back(lane == lane_ ? 1.0 : 0.0);
  obs.push_back(double(col_) / double(kEpisodeCap));
  return obs;
}

int FruitLineEnv::analysis_label() const {
  auto* self = const_cast<FruitLineEnv*>(this);
  for (int d = 1; d <= kLookahead; ++d) {
    const FruitColumn& c = self->column(col_ + d);
    for (int lane = 0; lane < kLanes; ++lane)
      if (c.barrier[lane]) return lane;
  }
  return kLanes;  // no barrier in sight
}

}  // namespace sdve::envs
