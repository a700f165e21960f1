#include "sdve/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sdve::numerics {

void Adam::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam::step: params/grads count mismatch");
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor* p : params) {
      m_.emplace_back(Tensor{});
      v_.emplace_back(Tensor{});
      m_.back().shape = p->shape;
      m_.back().data.assign(p->data.size(), 0.0);
      v_.back().shape = p->shape;
      v_.back().data.assign(p->data.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam::step: parameter count changed");
  for (size_t k = 0; k < params.size(); ++k)
    if (!params[k]->same_shape(*grads[k]) || params[k]->size() != m_[k].size())
      throw std::invalid_argument("Adam::step: shape mismatch");

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
  for (size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = *grads[k];
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (int i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace sdve::numerics
