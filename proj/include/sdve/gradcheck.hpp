#pragma once

#include <functional>
#include <vector>

#include "sdve/tape.hpp"

namespace sdve::numerics {

// Builds a scalar loss on the given tape from leafed parameter ids.
using LossBuilder = std::function<Tape::Id(Tape&, const std::vector<Tape::Id>&)>;

struct GradCheckResult {
  double max_err = 0.0;  // worst elementwise mismatch
  int elements = 0;
};

// Compares tape gradients against central finite differences, elementwise.
// The mismatch score is |analytic - fd| / max(|analytic|, |fd|); entries
// where both magnitudes fall at or below abs_floor count as matching, since
// they are zero at finite-difference resolution.
GradCheckResult check_gradients(const LossBuilder& build, std::vector<Tensor> params,
                                double h = 1e-5, double abs_floor = 1e-7);

}  // namespace sdve::numerics
