#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sdve/layers.hpp"
#include "sdve/tape.hpp"

namespace sdve::ppo {

struct NetConfig {
  int obs_size = 0;
  int encoder_size = 32;
  int lstm_size = 64;
  int actions = 0;
  int clusters = 3;  // 1 reduces the critic to a single value head
};

// Recurrent actor-critic. A feature MLP feeds a single-layer LSTM; the
// latent drives the policy head plus a clustered critic: an assignment head
// producing simplex weights alpha and a means head producing one value
// estimate per cluster. The critic value is the alpha-weighted sum of the
// cluster means, so the prediction always lies in their convex hull.
class PolicyValueNet {
 public:
  PolicyValueNet(const NetConfig& cfg, numerics::Rng& init_rng);

  struct TapeCtx {  // parameter leaf ids on one tape
    numerics::Tape::Id enc_W, enc_b, lstm_W, lstm_b;
    numerics::Tape::Id pi_W, pi_b, assign_W, mean_W, mean_b;
  };

  struct Forward {
    numerics::Tape::Id log_policy;  // log softmax over actions
    numerics::Tape::Id alpha;       // simplex over clusters
    numerics::Tape::Id means;       // per-cluster value estimates
    numerics::Tape::Id value;       // dot(alpha, means)
    numerics::Tape::Id latent;      // recurrent latent (input to all heads)
    numerics::Tape::Id h, c;        // next hidden state
  };

  TapeCtx lease(numerics::Tape& tape) const;
  Forward forward(numerics::Tape& tape, const TapeCtx& ctx, numerics::Tape::Id obs,
                  numerics::Tape::Id h, numerics::Tape::Id c) const;

  const NetConfig& config() const { return cfg_; }
  std::vector<numerics::Tensor*> parameters();
  std::vector<const numerics::Tensor*> parameters() const;
  std::vector<std::pair<std::string, numerics::Tensor*>> named_parameters();

  numerics::Tensor zero_hidden() const { return numerics::Tensor({cfg_.lstm_size}, 0.0); }

 private:
  NetConfig cfg_;
  numerics::Tensor enc_W_, enc_b_, lstm_W_, lstm_b_;
  // the assignment head is bias-free: cluster preference must come from the
  // latent, which blocks the degenerate all-states-one-cluster shortcut
  numerics::Tensor pi_W_, pi_b_, assign_W_, mean_W_, mean_b_;
};

}  // namespace sdve::ppo
