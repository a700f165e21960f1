#include "sdve/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace sdve::numerics {

Tensor uniform_init(Rng& rng, std::vector<int> shape, double scale) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

Tensor fanin_init(Rng& rng, int rows, int cols, double gain) {
  return uniform_init(rng, {rows, cols}, gain / std::sqrt(double(cols)));
}

LstmOut lstm_cell(Tape& tape, Tape::Id W, Tape::Id b, Tape::Id x, Tape::Id h, Tape::Id c) {
  const Tensor& w = tape.value(W);
  if (w.rank() != 2 || w.rows() % 4 != 0) throw std::invalid_argument("lstm_cell: W must be [4H, in+H]");
  const int hidden = w.rows() / 4;
  const int input = tape.value(x).size();
  if (w.cols() != input + hidden) throw std::invalid_argument("lstm_cell: W columns must equal input+hidden");
  if (tape.value(h).size() != hidden || tape.value(c).size() != hidden)
    throw std::invalid_argument("lstm_cell: hidden state size mismatch");
  if (tape.value(b).size() != 4 * hidden) throw std::invalid_argument("lstm_cell: b must be [4H]");

  Tape::Id z = tape.concat(x, h);
  Tape::Id gates = tape.affine(W, z, b);
  Tape::Id ig = tape.sigmoid(tape.slice(gates, 0, hidden));
  Tape::Id fg = tape.sigmoid(tape.slice(gates, hidden, hidden));
  Tape::Id cand = tape.tanh_op(tape.slice(gates, 2 * hidden, hidden));
  Tape::Id og = tape.sigmoid(tape.slice(gates, 3 * hidden, hidden));
  Tape::Id c_new = tape.add(tape.mul(fg, c), tape.mul(ig, cand));
  Tape::Id h_new = tape.mul(og, tape.tanh_op(c_new));
  return {h_new, c_new};
}

}  // namespace sdve::numerics
