#include "sdve/policy_net.hpp"

#include <stdexcept>

namespace sdve::ppo {

using numerics::Tape;
using numerics::Tensor;

PolicyValueNet::PolicyValueNet(const NetConfig& cfg, numerics::Rng& rng) : cfg_(cfg) {
  if (cfg.obs_size <= 0 || cfg.actions <= 0 || cfg.clusters <= 0 || cfg.encoder_size <= 0 ||
      cfg.lstm_size <= 0)
    throw std::invalid_argument("PolicyValueNet: all sizes must be positive");
  enc_W_ = numerics::fanin_init(rng, cfg.encoder_size, cfg.obs_size);
  enc_b_ = Tensor({cfg.encoder_size}, 0.0);
  lstm_W_ = numerics::fanin_init(rng, 4 * cfg.lstm_size, cfg.encoder_size + cfg.lstm_size);
  lstm_b_ = Tensor({4 * cfg.lstm_size}, 0.0);
  // small head inits: near-uniform initial policy and cluster assignments
  pi_W_ = numerics::fanin_init(rng, cfg.actions, cfg.lstm_size, 0.1);
  pi_b_ = Tensor({cfg.actions}, 0.0);
  assign_W_ = numerics::fanin_init(rng, cfg.clusters, cfg.lstm_size, 0.1);
  mean_W_ = numerics::fanin_init(rng, cfg.clusters, cfg.lstm_size, 0.1);
  mean_b_ = Tensor({cfg.clusters}, 0.0);
}

PolicyValueNet::TapeCtx PolicyValueNet::lease(Tape& tape) const {
  TapeCtx ctx;
  ctx.enc_W = tape.leaf(enc_W_);
  ctx.enc_b = tape.leaf(enc_b_);
  ctx.lstm_W = tape.leaf(lstm_W_);
  ctx.lstm_b = tape.leaf(lstm_b_);
  ctx.pi_W = tape.leaf(pi_W_);
  ctx.pi_b = tape.leaf(pi_b_);
  ctx.assign_W = tape.leaf(assign_W_);
  ctx.mean_W = tape.leaf(mean_W_);
  ctx.mean_b = tape.leaf(mean_b_);
  return ctx;
}

PolicyValueNet::Forward PolicyValueNet::forward(Tape& tape, const TapeCtx& ctx, Tape::Id obs,
                                                Tape::Id h, Tape::Id c) const {
  if (tape.value(obs).size() != cfg_.obs_size)
    throw std::invalid_argument("PolicyValueNet::forward: observation size mismatch");
  Forward out;
  Tape::Id enc = tape.tanh_op(tape.affine(ctx.enc_W, obs, ctx.enc_b));
  numerics::LstmOut lstm = numerics::lstm_cell(tape, ctx.lstm_W, ctx.lstm_b, enc, h, c);
  out.h = lstm.h;
  out.c = lstm.c;
  out.latent = lstm.h;
  out.log_policy = tape.log_softmax(tape.affine(ctx.pi_W, out.latent, ctx.pi_b));
  out.alpha = tape.softmax(tape.matvec(ctx.assign_W, out.latent));
  out.means = tape.affine(ctx.mean_W, out.latent, ctx.mean_b);
  out.value = tape.dot(out.alpha, out.means);
  return out;
}

std::vector<Tensor*> PolicyValueNet::parameters() {
  return {&enc_W_, &enc_b_, &lstm_W_, &lstm_b_, &pi_W_, &pi_b_, &assign_W_, &mean_W_, &mean_b_};
}

std::vector<const Tensor*> PolicyValueNet::parameters() const {
  return {&enc_W_, &enc_b_, &lstm_W_, &lstm_b_, &pi_W_, &pi_b_, &assign_W_, &mean_W_, &mean_b_};
}

std::vector<std::pair<std::string, Tensor*>> PolicyValueNet::named_parameters() {
  return {{"enc_W", &enc_W_},   {"enc_b", &enc_b_},       {"lstm_W", &lstm_W_},
          {"lstm_b", &lstm_b_}, {"pi_W", &pi_W_},         {"pi_b", &pi_b_},
          {"assign_W", &assign_W_}, {"mean_W", &mean_W_}, {"mean_b", &mean_b_}};
}

}  // namespace sdve::ppo
