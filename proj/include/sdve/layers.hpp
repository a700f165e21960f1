#pragma once

#include <utility>

#include "sdve/rng.hpp"
#include "sdve/tape.hpp"

namespace sdve::numerics {

// Uniform(-scale, scale) initialized tensor.
Tensor uniform_init(Rng& rng, std::vector<int> shape, double scale);

// Fan-in scaled init for a [rows, cols] weight matrix.
Tensor fanin_init(Rng& rng, int rows, int cols, double gain = 1.0);

struct LstmOut {
  Tape::Id h;
  Tape::Id c;
};

// One LSTM step. W is [4H, in+H] with gate rows stacked in the order
// input, forget, cell, output; b is [4H]. Returns the new (h, c).
LstmOut lstm_cell(Tape& tape, Tape::Id W, Tape::Id b, Tape::Id x, Tape::Id h, Tape::Id c);

}  // namespace sdve::numerics
