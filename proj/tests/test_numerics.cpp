#include <cmath>
#include <limits>

#include "doctest.h"
#include "sdve/adam.hpp"
#include "sdve/gradcheck.hpp"
#include "sdve/layers.hpp"
#include "sdve/rng.hpp"
#include "sdve/tape.hpp"

using namespace sdve::numerics;

TEST_CASE("softmax: uniform logits give uniform probabilities") {
  Tape tape;
  auto out = tape.value(tape.softmax(tape.leaf({0.0, 0.0, 0.0})));
  for (int i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax: large logits do not overflow thanks to the max shift") {
  Tape tape;
  auto out = tape.value(tape.softmax(tape.leaf({1000.0, 0.0})));
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::isfinite(out[0]));
}

TEST_CASE("softmax: hand-evaluated values for (1,2,3)") {
  Tape tape;
  auto out = tape.value(tape.softmax(tape.leaf({1.0, 2.0, 3.0})));
  CHECK(out[0] == doctest::Approx(0.09003).epsilon(1e-4));
  CHECK(out[1] == doctest::Approx(0.24473).epsilon(1e-4));
  CHECK(out[2] == doctest::Approx(0.66524).epsilon(1e-4));
}

TEST_CASE("softmax: outputs stay on the simplex and shift invariance holds") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> logits(size_t(2 + rng.uniform_int(6)));
    for (double& v : logits) v = rng.uniform(-20.0, 20.0);
    Tape tape;
    auto p = tape.value(tape.softmax(tape.leaf(logits)));
    double sum = 0.0;
    for (int i = 0; i < p.size(); ++i) {
      CHECK(p[i] >= 0.0);
      sum += p[i];
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-12);

    std::vector<double> shifted = logits;
    for (double& v : shifted) v += 123.5;
    Tape tape2;
    auto p2 = tape2.value(tape2.softmax(tape2.leaf(shifted)));
    for (int i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(p2[i]).epsilon(1e-12));
  }
}

TEST_CASE("softmax: non-finite input is rejected") {
  Tape tape;
  CHECK_THROWS(tape.softmax(tape.leaf({1.0, std::numeric_limits<double>::infinity()})));
  Tape tape2;
  CHECK_THROWS(tape2.softmax(tape2.leaf({std::nan(""), 0.0})));
}

TEST_CASE("backward: d(x^2)/dx at x=3 is 6") {
  Tape tape;
  Tape::Id x = tape.scalar_leaf(3.0);
  Tape::Id y = tape.square(x);
  tape.backward(y);
  CHECK(tape.grad(x)[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward: constants have zero gradient") {
  Tape tape;
  Tape::Id x = tape.scalar_leaf(2.5);
  Tape::Id c = tape.scalar_leaf(7.0);
  Tape::Id y = tape.add(tape.scale(c, 1.0), tape.scale(x, 0.0));
  tape.backward(y);
  CHECK(tape.grad(x)[0] == doctest::Approx(0.0));
}

TEST_CASE("backward: errors before any forward pass") {
  Tape tape;
  CHECK_THROWS(tape.backward(0));
  Tape::Id v = tape.leaf({1.0, 2.0});
  CHECK_THROWS(tape.backward(v));  // non-scalar root
  CHECK_THROWS(tape.backward(17)); // unknown id
}

TEST_CASE("backward: two-layer tanh MLP matches central finite differences") {
  Rng rng(7);
  std::vector<Tensor> params;
  params.push_back(uniform_init(rng, {2, 2}, 0.8));  // W1
  params.push_back(uniform_init(rng, {2}, 0.5));     // b1
  params.push_back(uniform_init(rng, {1, 2}, 0.8));  // W2
  params.push_back(uniform_init(rng, {1}, 0.5));     // b2
  params.push_back(uniform_init(rng, {2}, 1.0));     // input

  auto build = [](Tape& tape, const std::vector<Tape::Id>& ids) {
    Tape::Id hidden = tape.tanh_op(tape.affine(ids[0], ids[4], ids[1]));
    Tape::Id out = tape.tanh_op(tape.affine(ids[2], hidden, ids[3]));
    return tape.square(tape.pick(out, 0));
  };
  auto res = check_gradients(build, params);
  CHECK(res.max_err <= 1e-4);
  CHECK(res.elements == 11);
}

TEST_CASE("backward: composite op coverage against finite differences") {
  Rng rng(11);
  std::vector<Tensor> params;
  params.push_back(uniform_init(rng, {4}, 1.0));
  params.push_back(uniform_init(rng, {4}, 1.0));

  auto build = [](Tape& tape, const std::vector<Tape::Id>& ids) {
    Tape::Id a = ids[0], b = ids[1];
    Tape::Id s = tape.softmax(a);
    Tape::Id ls = tape.log_softmax(b);
    Tape::Id mixed = tape.mul(tape.sigmoid(a), tape.exp_op(tape.scale(b, 0.3)));
    Tape::Id cat = tape.concat(tape.slice(mixed, 0, 2), tape.slice(mixed, 2, 2));
    Tape::Id inner = tape.dot(s, ls);
    Tape::Id rec = tape.reciprocal(tape.add_const(tape.square(inner), 1.0));
    Tape::Id total = tape.add(tape.mean(cat), tape.smul(tape.sum(s), rec));
    return tape.log_op(tape.add_const(tape.square(total), 1.0), 1e-6);
  };
  auto res = check_gradients(build, params);
  CHECK(res.max_err <= 1e-4);
}

TEST_CASE("adam: first step moves each parameter by about -lr when grad=1") {
  Adam adam({1e-3, 0.9, 0.999, 1e-8});
  Tensor p({3}, 5.0);
  Tensor g({3}, 1.0);
  adam.step({&p}, {&g});
  for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(5.0 - 1e-3).epsilon(1e-6));
  CHECK(std::fabs(p[0] - (5.0 - 1e-3)) < 1e-9);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Adam adam;
  Tensor p({2}, 1.5);
  Tensor g({2}, 0.0);
  adam.step({&p}, {&g});
  CHECK(p[0] == 1.5);
  CHECK(p[1] == 1.5);
}

TEST_CASE("adam: two steps with constant gradient match the hand recurrence") {
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8, g = 0.7;
  Adam adam({lr, b1, b2, eps});
  Tensor p({1}, 2.0);
  Tensor grad({1}, g);
  adam.step({&p}, {&grad});
  adam.step({&p}, {&grad});

  // textbook recurrence, evaluated directly
  double theta = 2.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    theta -= lr * mhat / (std::sqrt(vhat) + eps);
  }
  CHECK(p[0] == doctest::Approx(theta).epsilon(1e-14));
}

TEST_CASE("adam: identical inputs produce identical updates") {
  auto run = [] {
    Adam adam({1e-2, 0.9, 0.999, 1e-8});
    Tensor p({4}, 1.0);
    Tensor g = Tensor::from({0.5, -0.25, 0.125, 2.0});
    for (int i = 0; i < 5; ++i) adam.step({&p}, {&g});
    return p;
  };
  Tensor a = run(), b = run();
  for (int i = 0; i < 4; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("adam: shape mismatch is an error") {
  Adam adam;
  Tensor p({3}, 0.0);
  Tensor g({2}, 0.0);
  CHECK_THROWS(adam.step({&p}, {&g}));
}

TEST_CASE("lstm_cell: all-zero weights and state give zero outputs") {
  Tape tape;
  Tape::Id W = tape.leaf(Tensor({4, 2}, 0.0));
  Tape::Id b = tape.leaf(Tensor({4}, 0.0));
  Tape::Id x = tape.leaf(Tensor({1}, 0.0));
  Tape::Id h = tape.leaf(Tensor({1}, 0.0));
  Tape::Id c = tape.leaf(Tensor({1}, 0.0));
  auto out = lstm_cell(tape, W, b, x, h, c);
  CHECK(tape.value(out.h)[0] == doctest::Approx(0.0));
  CHECK(tape.value(out.c)[0] == doctest::Approx(0.0));
}

TEST_CASE("lstm_cell: hidden output is bounded by 1 in magnitude") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int hidden = 4, input = 3;
    Tape tape;
    Tape::Id W = tape.leaf(uniform_init(rng, {4 * hidden, input + hidden}, 1.0));
    Tape::Id b = tape.leaf(uniform_init(rng, {4 * hidden}, 1.0));
    Tape::Id x = tape.leaf(uniform_init(rng, {input}, 1.0));
    Tape::Id h = tape.leaf(uniform_init(rng, {hidden}, 0.9));
    Tape::Id c = tape.leaf(uniform_init(rng, {hidden}, 0.9));
    auto out = lstm_cell(tape, W, b, x, h, c);
    const Tensor& hv = tape.value(out.h);
    for (int i = 0; i < hv.size(); ++i) {
      CHECK(std::fabs(hv[i]) < 1.0);
      CHECK(std::isfinite(hv[i]));
    }
  }
}

TEST_CASE("lstm_cell: single unit matches hand-evaluated gate arithmetic") {
  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double x = 0.5, h = 0.3, c = -0.2;
  Tensor W({4, 2});
  // rows: input, forget, cell, output
  W.at2(0, 0) = 0.1;  W.at2(0, 1) = 0.2;
  W.at2(1, 0) = -0.3; W.at2(1, 1) = 0.4;
  W.at2(2, 0) = 0.5;  W.at2(2, 1) = -0.6;
  W.at2(3, 0) = 0.7;  W.at2(3, 1) = 0.8;
  Tensor b = Tensor::from({0.01, 0.02, 0.03, 0.04});

  const double ig = sigmoid(0.1 * x + 0.2 * h + 0.01);
  const double fg = sigmoid(-0.3 * x + 0.4 * h + 0.02);
  const double cand = std::tanh(0.5 * x - 0.6 * h + 0.03);
  const double og = sigmoid(0.7 * x + 0.8 * h + 0.04);
  const double c_expect = fg * c + ig * cand;
  const double h_expect = og * std::tanh(c_expect);

  Tape tape;
  auto out = lstm_cell(tape, tape.leaf(W), tape.leaf(b), tape.leaf({x}), tape.leaf({h}), tape.leaf({c}));
  CHECK(tape.value(out.c)[0] == doctest::Approx(c_expect).epsilon(1e-12));
  CHECK(tape.value(out.h)[0] == doctest::Approx(h_expect).epsilon(1e-12));
}

TEST_CASE("lstm_cell: dimension mismatch is an error") {
  Tape tape;
  Tape::Id W = tape.leaf(Tensor({4, 3}, 0.0));  // expects input+hidden == 3
  Tape::Id b = tape.leaf(Tensor({4}, 0.0));
  Tape::Id x = tape.leaf(Tensor({3}, 0.0));
  Tape::Id h = tape.leaf(Tensor({1}, 0.0));
  Tape::Id c = tape.leaf(Tensor({1}, 0.0));
  CHECK_THROWS(lstm_cell(tape, W, b, x, h, c));
}

TEST_CASE("tape: shape mismatches and bad ops are rejected") {
  Tape tape;
  Tape::Id a = tape.leaf({1.0, 2.0});
  Tape::Id b = tape.leaf({1.0, 2.0, 3.0});
  CHECK_THROWS(tape.add(a, b));
  CHECK_THROWS(tape.mul(a, b));
  CHECK_THROWS(tape.dot(a, b));
  CHECK_THROWS(tape.pick(a, 5));
  CHECK_THROWS(tape.slice(b, 2, 2));
}

TEST_CASE("tape: clamp and min route gradients to the active branch") {
  Rng rng(21);
  std::vector<Tensor> params;
  params.push_back(Tensor::from({0.4, 1.7, -0.3}));  // clamp band [0,1]: mid, above, below
  params.push_back(Tensor::from({0.9, 0.1, 0.5}));

  auto build = [](Tape& tape, const std::vector<Tape::Id>& ids) {
    Tape::Id clamped = tape.clamp(ids[0], 0.0, 1.0);
    Tape::Id m = tape.min_elem(clamped, ids[1]);
    return tape.sum(m);
  };
  auto res = check_gradients(build, params);
  CHECK(res.max_err <= 1e-4);
}
