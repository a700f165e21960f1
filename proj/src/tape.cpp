#include "sdve/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdve::numerics {

const Tape::Node& Tape::node(Id id) const {
  if (id < 0 || size_t(id) >= nodes_.size())
    throw std::logic_error("Tape: invalid node id (no forward pass recorded?)");
  return nodes_[size_t(id)];
}

Tape::Node& Tape::node(Id id) { return const_cast<Node&>(const_cast<const Tape*>(this)->node(id)); }

Tape::Id Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Id(nodes_.size() - 1);
}

Tape::Id Tape::leaf(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::Id Tape::leaf(const std::vector<double>& v) { return leaf(Tensor::from(v)); }

Tape::Id Tape::scalar_leaf(double v) { return leaf(Tensor::scalar(v)); }

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Tape::Id Tape::affine(Id W, Id x, Id b) {
  const Tensor& w = value(W);
  const Tensor& xv = value(x);
  const Tensor& bv = value(b);
  require(w.rank() == 2, "affine: W must be a matrix");
  require(xv.rank() == 1 && xv.size() == w.cols(), "affine: x does not match W columns");
  require(bv.rank() == 1 && bv.size() == w.rows(), "affine: b does not match W rows");
  const int m = w.rows(), k = w.cols();
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    double acc = bv[i];
    const double* wr = &w.data[size_t(i) * size_t(k)];
    for (int j = 0; j < k; ++j) acc += wr[j] * xv[j];
    out[i] = acc;
  }
  Node n;
  n.value = std::move(out);
  n.a = W;
  n.b = x;
  n.c = b;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& dy = s.grad;
    Tensor& dW = t.nodes_[size_t(s.a)].grad;
    Tensor& dx = t.nodes_[size_t(s.b)].grad;
    Tensor& db = t.nodes_[size_t(s.c)].grad;
    const Tensor& w = t.nodes_[size_t(s.a)].value;
    const Tensor& xv = t.nodes_[size_t(s.b)].value;
    const int m = w.rows(), k = w.cols();
    for (int i = 0; i < m; ++i) {
      const double g = dy[i];
      if (g == 0.0) continue;
      double* dwr = &dW.data[size_t(i) * size_t(k)];
      const double* wr = &w.data[size_t(i) * size_t(k)];
      for (int j = 0; j < k; ++j) {
        dwr[j] += g * xv[j];
        dx[j] += g * wr[j];
      }
      db[i] += g;
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::matvec(Id W, Id x) {
  const Tensor& w = value(W);
  const Tensor& xv = value(x);
  require(w.rank() == 2, "matvec: W must be a matrix");
  require(xv.rank() == 1 && xv.size() == w.cols(), "matvec: x does not match W columns");
  const int m = w.rows(), k = w.cols();
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* wr = &w.data[size_t(i) * size_t(k)];
    for (int j = 0; j < k; ++j) acc += wr[j] * xv[j];
    out[i] = acc;
  }
  Node n;
  n.value = std::move(out);
  n.a = W;
  n.b = x;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& dy = s.grad;
    Tensor& dW = t.nodes_[size_t(s.a)].grad;
    Tensor& dx = t.nodes_[size_t(s.b)].grad;
    const Tensor& w = t.nodes_[size_t(s.a)].value;
    const Tensor& xv = t.nodes_[size_t(s.b)].value;
    const int m = w.rows(), k = w.cols();
    for (int i = 0; i < m; ++i) {
      const double g = dy[i];
      if (g == 0.0) continue;
      double* dwr = &dW.data[size_t(i) * size_t(k)];
      const double* wr = &w.data[size_t(i) * size_t(k)];
      for (int j = 0; j < k; ++j) {
        dwr[j] += g * xv[j];
        dx[j] += g * wr[j];
      }
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.same_shape(bv), "add: shape mismatch");
  Tensor out = av;
  for (int i = 0; i < out.size(); ++i) out[i] += bv[i];
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.b = b;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    Tensor& db = t.nodes_[size_t(s.b)].grad;
    for (int i = 0; i < s.grad.size(); ++i) {
      da[i] += s.grad[i];
      db[i] += s.grad[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::sub(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.same_shape(bv), "sub: shape mismatch");
  Tensor out = av;
  for (int i = 0; i < out.size(); ++i) out[i] -= bv[i];
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.b = b;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    Tensor& db = t.nodes_[size_t(s.b)].grad;
    for (int i = 0; i < s.grad.size(); ++i) {
      da[i] += s.grad[i];
      db[i] -= s.grad[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::mul(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.same_shape(bv), "mul: shape mismatch");
  Tensor out = av;
  for (int i = 0; i < out.size(); ++i) out[i] *= bv[i];
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.b = b;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& av = t.nodes_[size_t(s.a)].value;
    const Tensor& bv = t.nodes_[size_t(s.b)].value;
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    Tensor& db = t.nodes_[size_t(s.b)].grad;
    for (int i = 0; i < s.grad.size(); ++i) {
      da[i] += bv[i] * s.grad[i];
      db[i] += av[i] * s.grad[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::min_elem(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.same_shape(bv), "min_elem: shape mismatch");
  Tensor out = av;
  for (int i = 0; i < out.size(); ++i) out[i] = std::min(av[i], bv[i]);
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.b = b;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& av = t.nodes_[size_t(s.a)].value;
    const Tensor& bv = t.nodes_[size_t(s.b)].value;
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    Tensor& db = t.nodes_[size_t(s.b)].grad;
    for (int i = 0; i < s.grad.size(); ++i) {
      if (av[i] <= bv[i])
        da[i] += s.grad[i];
      else
        db[i] += s.grad[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::smul(Id v, Id s) {
  const Tensor& vv = value(v);
  const Tensor& sv = value(s);
  require(sv.is_scalar(), "smul: second operand must be scalar");
  Tensor out = vv;
  for (int i = 0; i < out.size(); ++i) out[i] *= sv[0];
  Node n;
  n.value = std::move(out);
  n.a = v;
  n.b = s;
  n.back = [](Tape& t, int self) {
    Node& nd = t.nodes_[size_t(self)];
    const Tensor& vv = t.nodes_[size_t(nd.a)].value;
    const Tensor& sv = t.nodes_[size_t(nd.b)].value;
    Tensor& dv = t.nodes_[size_t(nd.a)].grad;
    Tensor& ds = t.nodes_[size_t(nd.b)].grad;
    for (int i = 0; i < nd.grad.size(); ++i) {
      dv[i] += sv[0] * nd.grad[i];
      ds[0] += vv[i] * nd.grad[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::scale(Id a, double c) {
  Tensor out = value(a);
  for (double& v : out.data) v *= c;
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.p0 = c;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) da[i] += s.p0 * s.grad[i];
  };
  return push(std::move(n));
}

Tape::Id Tape::add_const(Id a, double c) {
  Tensor out = value(a);
  for (double& v : out.data) v += c;
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) da[i] += s.grad[i];
  };
  return push(std::move(n));
}

Tape::Id Tape::clamp(Id a, double lo, double hi) {
  require(lo <= hi, "clamp: lo > hi");
  Tensor out = value(a);
  for (double& v : out.data) v = std::clamp(v, lo, hi);
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.p0 = lo;
  n.p1 = hi;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& av = t.nodes_[size_t(s.a)].value;
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i)
      if (av[i] > s.p0 && av[i] < s.p1) da[i] += s.grad[i];
  };
  return push(std::move(n));
}

Tape::Id Tape::tanh_op(Id a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::tanh(v);
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) {
      const double y = s.value[i];
      da[i] += (1.0 - y * y) * s.grad[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::sigmoid(Id a) {
  Tensor out = value(a);
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) {
      const double y = s.value[i];
      da[i] += y * (1.0 - y) * s.grad[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::relu(Id a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::max(0.0, v);
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& av = t.nodes_[size_t(s.a)].value;
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i)
      if (av[i] > 0.0) da[i] += s.grad[i];
  };
  return push(std::move(n));
}

Tape::Id Tape::square(Id a) {
  Tensor out = value(a);
  for (double& v : out.data) v *= v;
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& av = t.nodes_[size_t(s.a)].value;
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) da[i] += 2.0 * av[i] * s.grad[i];
  };
  return push(std::move(n));
}

Tape::Id Tape::exp_op(Id a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::exp(v);
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) da[i] += s.value[i] * s.grad[i];
  };
  return push(std::move(n));
}

Tape::Id Tape::log_op(Id a, double eps) {
  const Tensor& av = value(a);
  Tensor out = av;
  for (double& v : out.data) v = std::log(v + eps);
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.p0 = eps;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& av = t.nodes_[size_t(s.a)].value;
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) da[i] += s.grad[i] / (av[i] + s.p0);
  };
  return push(std::move(n));
}

Tape::Id Tape::reciprocal(Id a) {
  Tensor out = value(a);
  for (double& v : out.data) v = 1.0 / v;
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) {
      const double y = s.value[i];
      da[i] -= y * y * s.grad[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::softmax(Id a) {
  const Tensor& av = value(a);
  require(av.rank() == 1 && av.size() >= 1, "softmax: vector input required");
  if (!av.all_finite()) throw std::invalid_argument("softmax: non-finite input");
  const double mx = *std::max_element(av.data.begin(), av.data.end());
  Tensor out = av;
  double sum = 0.0;
  for (double& v : out.data) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out.data) v /= sum;
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    double inner = 0.0;
    for (int i = 0; i < s.grad.size(); ++i) inner += s.grad[i] * s.value[i];
    for (int i = 0; i < s.grad.size(); ++i) da[i] += s.value[i] * (s.grad[i] - inner);
  };
  return push(std::move(n));
}

Tape::Id Tape::log_softmax(Id a) {
  const Tensor& av = value(a);
  require(av.rank() == 1 && av.size() >= 1, "log_softmax: vector input required");
  if (!av.all_finite()) throw std::invalid_argument("log_softmax: non-finite input");
  const double mx = *std::max_element(av.data.begin(), av.data.end());
  double sum = 0.0;
  for (double v : av.data) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  Tensor out = av;
  for (double& v : out.data) v -= lse;
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    double gsum = 0.0;
    for (int i = 0; i < s.grad.size(); ++i) gsum += s.grad[i];
    for (int i = 0; i < s.grad.size(); ++i) da[i] += s.grad[i] - std::exp(s.value[i]) * gsum;
  };
  return push(std::move(n));
}

Tape::Id Tape::concat(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.rank() == 1 && bv.rank() == 1, "concat: vector inputs required");
  Tensor out({av.size() + bv.size()});
  std::copy(av.data.begin(), av.data.end(), out.data.begin());
  std::copy(bv.data.begin(), bv.data.end(), out.data.begin() + av.size());
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.b = b;
  n.i0 = av.size();
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    Tensor& db = t.nodes_[size_t(s.b)].grad;
    for (int i = 0; i < s.i0; ++i) da[i] += s.grad[i];
    for (int i = s.i0; i < s.grad.size(); ++i) db[i - s.i0] += s.grad[i];
  };
  return push(std::move(n));
}

Tape::Id Tape::slice(Id a, int offset, int len) {
  const Tensor& av = value(a);
  require(av.rank() == 1, "slice: vector input required");
  require(offset >= 0 && len >= 1 && offset + len <= av.size(), "slice: out of range");
  Tensor out({len});
  std::copy(av.data.begin() + offset, av.data.begin() + offset + len, out.data.begin());
  Node n;
  n.value = std::move(out);
  n.a = a;
  n.i0 = offset;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < s.grad.size(); ++i) da[s.i0 + i] += s.grad[i];
  };
  return push(std::move(n));
}

Tape::Id Tape::pick(Id a, int index) {
  const Tensor& av = value(a);
  require(av.rank() == 1, "pick: vector input required");
  require(index >= 0 && index < av.size(), "pick: index out of range");
  Node n;
  n.value = Tensor::scalar(av[index]);
  n.a = a;
  n.i0 = index;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    t.nodes_[size_t(s.a)].grad[s.i0] += s.grad[0];
  };
  return push(std::move(n));
}

Tape::Id Tape::dot(Id a, Id b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.same_shape(bv), "dot: shape mismatch");
  double acc = 0.0;
  for (int i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  Node n;
  n.value = Tensor::scalar(acc);
  n.a = a;
  n.b = b;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    const Tensor& av = t.nodes_[size_t(s.a)].value;
    const Tensor& bv = t.nodes_[size_t(s.b)].value;
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    Tensor& db = t.nodes_[size_t(s.b)].grad;
    const double g = s.grad[0];
    for (int i = 0; i < av.size(); ++i) {
      da[i] += bv[i] * g;
      db[i] += av[i] * g;
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::sum(Id a) {
  const Tensor& av = value(a);
  double acc = 0.0;
  for (double v : av.data) acc += v;
  Node n;
  n.value = Tensor::scalar(acc);
  n.a = a;
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < da.size(); ++i) da[i] += s.grad[0];
  };
  return push(std::move(n));
}

Tape::Id Tape::mean(Id a) {
  const Tensor& av = value(a);
  require(av.size() >= 1, "mean: empty input");
  double acc = 0.0;
  for (double v : av.data) acc += v;
  Node n;
  n.value = Tensor::scalar(acc / av.size());
  n.a = a;
  n.p0 = 1.0 / av.size();
  n.back = [](Tape& t, int self) {
    Node& s = t.nodes_[size_t(self)];
    Tensor& da = t.nodes_[size_t(s.a)].grad;
    for (int i = 0; i < da.size(); ++i) da[i] += s.p0 * s.grad[0];
  };
  return push(std::move(n));
}

void Tape::backward(Id root) {
  const Node& r = node(root);  // throws on empty tape / bad id
  if (!r.value.is_scalar()) throw std::logic_error("Tape::backward: root must be scalar");
  for (Node& n : nodes_) {
    n.grad.shape = n.value.shape;
    n.grad.data.assign(n.value.data.size(), 0.0);
  }
  nodes_[size_t(root)].grad[0] = 1.0;
  for (int i = int(nodes_.size()) - 1; i >= 0; --i)
    if (nodes_[size_t(i)].back) nodes_[size_t(i)].back(*this, i);
}

}  // namespace sdve::numerics
