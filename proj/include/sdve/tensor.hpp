#pragma once

#include <string>
#include <vector>

namespace sdve::numerics {

// Dense row-major tensor of doubles. Rank 0 (scalar), 1 (vector) or 2 (matrix)
// is all the networks here need.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0);

  static Tensor scalar(double v);
  static Tensor from(std::vector<double> v);

  int size() const { return int(data.size()); }
  int rank() const { return int(shape.size()); }
  bool is_scalar() const { return shape.empty() && data.size() == 1; }
  int rows() const;
  int cols() const;

  double& operator[](int i) { return data[size_t(i)]; }
  double operator[](int i) const { return data[size_t(i)]; }
  double& at2(int r, int c) { return data[size_t(r) * size_t(cols()) + size_t(c)]; }
  double at2(int r, int c) const { return data[size_t(r) * size_t(cols()) + size_t(c)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
  void fill(double v);
  std::string shape_str() const;
};

}  // namespace sdve::numerics
