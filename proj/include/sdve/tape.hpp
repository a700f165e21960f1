#pragma once

#include <vector>

#include "sdve/tensor.hpp"

namespace sdve::numerics {

// Reverse-mode tape. Every primitive op appends one node recording its
// inputs; backward() replays the recorded ops exactly once, in reverse
// order, accumulating gradients into every node.
//
// Backward handlers are plain function pointers over a small per-node
// payload, so taping a forward pass allocates only the output tensors.
class Tape {
 public:
  using Id = int;

  Id leaf(Tensor value);
  Id leaf(const std::vector<double>& v);
  Id scalar_leaf(double v);

  const Tensor& value(Id id) const { return node(id).value; }
  const Tensor& grad(Id id) const { return node(id).grad; }
  int node_count() const { return int(nodes_.size()); }
  void clear() { nodes_.clear(); }

  // y = W x + b, with W [m,n], x [n], b [m]
  Id affine(Id W, Id x, Id b);
  Id matvec(Id W, Id x);

  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);       // elementwise
  Id min_elem(Id a, Id b);  // elementwise min; ties route gradient to a
  Id smul(Id v, Id s);      // vector times scalar node

  Id scale(Id a, double c);
  Id add_const(Id a, double c);
  Id clamp(Id a, double lo, double hi);

  Id tanh_op(Id a);
  Id sigmoid(Id a);
  Id relu(Id a);
  Id square(Id a);
  Id exp_op(Id a);
  Id log_op(Id a, double eps = 0.0);  // log(x + eps)
  Id reciprocal(Id a);

  // Vector-only ops. softmax is shift-invariant (max subtracted before exp)
  // and rejects non-finite inputs.
  Id softmax(Id a);
  Id log_softmax(Id a);
  Id concat(Id a, Id b);
  Id slice(Id a, int offset, int len);
  Id pick(Id a, int index);
  Id dot(Id a, Id b);

  Id sum(Id a);
  Id mean(Id a);

  // Seeds d(root)=1 and sweeps the tape in reverse. root must be scalar and
  // must refer to a recorded forward value.
  void backward(Id root);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    void (*back)(Tape&, int) = nullptr;
    int a = -1, b = -1, c = -1;  // input ids
    double p0 = 0.0, p1 = 0.0;   // numeric op params
    int i0 = 0, i1 = 0;          // integer op params
  };

  const Node& node(Id id) const;
  Node& node(Id id);
  Id push(Node n);

  std::vector<Node> nodes_;
};

}  // namespace sdve::numerics
