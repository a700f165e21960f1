#include "sdve/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sdve::numerics {

Tensor::Tensor(std::vector<int> s, double fill) : shape(std::move(s)) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("Tensor: nonpositive dimension");
    n *= size_t(d);
  }
  data.assign(n, fill);
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.data.assign(1, v);
  return t;
}

Tensor Tensor::from(std::vector<double> v) {
  Tensor t;
  t.shape = {int(v.size())};
  t.data = std::move(v);
  return t;
}

int Tensor::rows() const {
  if (shape.size() != 2) throw std::logic_error("Tensor::rows: not a matrix");
  return shape[0];
}

int Tensor::cols() const {
  if (shape.size() != 2) throw std::logic_error("Tensor::cols: not a matrix");
  return shape[1];
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace sdve::numerics
