#include "sdve/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdve::analysis {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / double(xs.size());
}

double variance(std::span<const double> xs) {
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / double(xs.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 samples");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("pearson: zero variance input (r undefined)");
  return sxy / std::sqrt(sxx * syy);
}

double least_squares_slope(std::span<const double> y) {
  if (y.size() < 2) throw std::invalid_argument("least_squares_slope: need at least 2 points");
  const double n = double(y.size());
  const double mx = (n - 1.0) / 2.0;
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double dx = double(i) - mx;
    sxy += dx * (y[i] - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double percentile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("percentile: empty input");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("percentile: q out of [0,1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * double(xs.size() - 1);
  const size_t lo = size_t(pos);
  const size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - double(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

namespace {

// Regularized lower incomplete gamma P(a, x) by series expansion (x < a+1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by Lentz continued fraction (x >= a+1).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& table) {
  if (table.empty() || table.front().empty())
    throw std::invalid_argument("chi_square_independence: empty table");
  const size_t cols = table.front().size();
  for (const auto& row : table)
    if (row.size() != cols) throw std::invalid_argument("chi_square_independence: ragged table");

  std::vector<double> row_sum(table.size(), 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (size_t r = 0; r < table.size(); ++r)
    for (size_t c = 0; c < cols; ++c) {
      if (table[r][c] < 0.0) throw std::invalid_argument("chi_square_independence: negative count");
      row_sum[r] += table[r][c];
      col_sum[c] += table[r][c];
      total += table[r][c];
    }

  int live_rows = 0, live_cols = 0;
  for (double s : row_sum) live_rows += s > 0.0;
  for (double s : col_sum) live_cols += s > 0.0;
  ChiSquareResult res;
  res.dof = std::max(0, (live_rows - 1) * (live_cols - 1));
  if (res.dof == 0 || total <= 0.0) return res;  // degenerate table: no association testable

  for (size_t r = 0; r < table.size(); ++r) {
    if (row_sum[r] == 0.0) continue;
    for (size_t c = 0; c < cols; ++c) {
      if (col_sum[c] == 0.0) continue;
      const double expected = row_sum[r] * col_sum[c] / total;
      const double diff = table[r][c] - expected;
      res.statistic += diff * diff / expected;
    }
  }
  res.p_value = gamma_q(double(res.dof) / 2.0, res.statistic / 2.0);
  return res;
}

}  // namespace sdve::analysis
