#include "sdve/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace sdve::numerics {

namespace {

double eval_loss(const LossBuilder& build, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Tape::Id> ids;
  ids.reserve(params.size());
  for (const Tensor& p : params) ids.push_back(tape.leaf(p));
  Tape::Id loss = build(tape, ids);
  const Tensor& v = tape.value(loss);
  if (!v.is_scalar()) throw std::logic_error("check_gradients: loss must be scalar");
  return v[0];
}

}  // namespace

GradCheckResult check_gradients(const LossBuilder& build, std::vector<Tensor> params,
                                double h, double abs_floor) {
  // analytic pass
  Tape tape;
  std::vector<Tape::Id> ids;
  ids.reserve(params.size());
  for (const Tensor& p : params) ids.push_back(tape.leaf(p));
  Tape::Id loss = build(tape, ids);
  tape.backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Tape::Id id : ids) analytic.push_back(tape.grad(id));

  GradCheckResult res;
  for (size_t k = 0; k < params.size(); ++k) {
    for (int i = 0; i < params[k].size(); ++i) {
      const double orig = params[k][i];
      params[k][i] = orig + h;
      const double fp = eval_loss(build, params);
      params[k][i] = orig - h;
      const double fm = eval_loss(build, params);
      params[k][i] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      const double a = analytic[k][i];
      const double diff = std::fabs(a - fd);
      double err = 0.0;
      if (std::fabs(a) > abs_floor || std::fabs(fd) > abs_floor)
        err = diff / std::max(std::fabs(a), std::fabs(fd));
      res.max_err = std::max(res.max_err, err);
      ++res.elements;
    }
  }
  return res;
}

}  // namespace sdve::numerics
