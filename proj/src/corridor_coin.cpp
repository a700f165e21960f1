#include "sdve/corridor_coin.hpp"

#include <cmath>
#include <stdexcept>

namespace sdve::envs {

CorridorLayout generate_corridor_layout(uint64_t seed) {
  uint64_t s = seed;
  CorridorLayout lay;
  lay.length = 12 + int(numerics::splitmix64(s) % 9);  // 12..20
  lay.dominant_family = int(numerics::splitmix64(s) % 3);
  lay.hazard_family.assign(size_t(lay.length), kNoHazard);
  lay.saw_phase.assign(size_t(lay.length), 0);

  const int wanted = 2 + int(numerics::splitmix64(s) % 3);  // 2..4 hazards
  int placed = 0;
  // hazards start after a safe runway and keep a gap of at least 3 cells,
  // which keeps every level solvable (clean approach cell, clean landing)
  for (int attempt = 0; attempt < 64 && placed < wanted; ++attempt) {
    const int lo = 4, hi = lay.length - 4;
    if (hi < lo) break;
    const int cell = lo + int(numerics::splitmix64(s) % uint64_t(hi - lo + 1));
    bool ok = true;
    for (int d = -2; d <= 2; ++d) {
      const int c = cell + d;
      if (c >= 0 && c < lay.length && lay.hazard_family[size_t(c)] != kNoHazard) ok = false;
    }
    if (!ok) continue;
    int family = lay.dominant_family;
    if (numerics::splitmix64(s) % 10 >= 7) {  // 30%: one of the two other families
      const int other = int(numerics::splitmix64(s) % 2);
      family = (lay.dominant_family + 1 + other) % 3;
    }
    lay.hazard_family[size_t(cell)] = family;
    lay.saw_phase[size_t(cell)] = int(numerics::splitmix64(s) % 2);
    ++placed;
  }
  return lay;
}

CorridorCoinEnv::CorridorCoinEnv(const std::vector<uint64_t>& level_seeds) {
  layouts_.reserve(level_seeds.size());
  for (uint64_t seed : level_seeds) layouts_.push_back(generate_corridor_layout(seed));
}

CorridorCoinEnv::CorridorCoinEnv(std::vector<CorridorLayout> layouts) : layouts_(std::move(layouts)) {}

std::vector<double> CorridorCoinEnv::reset_level(int level_index) {
  if (level_index < 0 || size_t(level_index) >= layouts_.size())
    throw std::invalid_argument("CorridorCoinEnv::reset_level: level index out of range");
  level_ = level_index;
  pos_ = 0;
  t_ = 0;
  active_ = true;
  return observation();
}

bool CorridorCoinEnv::saw_active(int cell, int t) const {
  const CorridorLayout& lay = layouts_[size_t(level_)];
  return (t + lay.saw_phase[size_t(cell)]) % 2 == 0;
}

StepResult CorridorCoinEnv::step(int action) {
  if (!active_) throw std::logic_error("CorridorCoinEnv::step: episode not active (reset first)");
  if (action < 0 || action >= action_count())
    throw std::invalid_argument("CorridorCoinEnv::step: invalid action index");

  const CorridorLayout& lay = layouts_[size_t(level_)];
  const int arrive_t = t_ + 1;
  int dest = pos_;
  switch (action) {
    case kWalk:
    case kDuck:
      dest = pos_ + 1;
      break;
    case kJump:
      dest = pos_ + 2;
      break;
    case kWait:
      dest = pos_;
      break;
  }
  const bool jumped = (dest == pos_ + 2);
  dest = std::min(dest, lay.length - 1);

  bool dead = false;
  // jump arc passes over pos+1
  if (jumped && dest == pos_ + 2) {
    const int over = pos_ + 1;
    const int fam = lay.hazard_family[size_t(over)];
    if (fam == kOverhang) dead = true;                             // head hits the overhang
    if (fam == kSaw && saw_active(over, arrive_t)) dead = true;    // saw blades reach jump height
  }
  // arrival cell
  const int fam = lay.hazard_family[size_t(dest)];
  if (fam == kSpike) dead = true;
  if (fam == kOverhang && !(action == kDuck && dest == pos_ + 1)) dead = true;
  if (fam == kSaw && saw_active(dest, arrive_t)) dead = true;

  t_ = arrive_t;
  pos_ = dest;

  StepResult out;
  out.level_id = level_;
  if (dead) {
    out.reward = 0.0;
    out.done = true;
  } else if (pos_ == lay.length - 1) {
    out.reward = kCoinReward;
    out.done = true;
  } else if (t_ >= kEpisodeCap) {
    out.reward = 0.0;
    out.done = true;
  }
  if (out.done) active_ = false;
  out.observation = out.done ? std::vector<double>(size_t(observation_size()), 0.0) : observation();
  return out;
}

std::vector<double> CorridorCoinEnv::observation() const {
  const CorridorLayout& lay = layouts_[size_t(level_)];
  std::vector<double> obs;
  obs.reserve(size_t(observation_size()));
  for (int d = 1; d <= kLookahead; ++d) {
    const int c = pos_ + d;
    double spike = 0, overhang = 0, saw = 0, saw_on = 0, coin = 0;
    if (c <= lay.length - 1) {
      const int fam = lay.hazard_family[size_t(c)];
      spike = fam == kSpike;
      overhang = fam == kOverhang;
      saw = fam == kSaw;
      saw_on = (fam == kSaw && saw_active(c, t_)) ? 1.0 : 0.0;
      coin = (c == lay.length - 1) ? 1.0 : 0.0;
    }
    obs.insert(obs.end(), {spike, overhang, saw, saw_on, coin});
  }
  obs.push_back(double(pos_) / double(kMaxLength));
  obs.push_back(double(t_) / double(kEpisodeCap));
  obs.push_back(double(t_ % 2));
  return obs;
}

long CorridorCoinEnv::discrete_state_id() const { return long(pos_) * 2 + (t_ % 2); }

int CorridorCoinEnv::analysis_label() const {
  const CorridorLayout& lay = layouts_[size_t(level_)];
  for (int d = 1; d <= kLookahead; ++d) {
    const int c = pos_ + d;
    if (c <= lay.length - 1 && lay.hazard_family[size_t(c)] != kNoHazard)
      return lay.hazard_family[size_t(c)];
  }
  return kNoHazard;
}

}  // namespace sdve::envs
