#pragma once

#include <span>
#include <vector>

namespace sdve::analysis {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // population variance

// Product-moment correlation coefficient. Requires >= 2 samples and nonzero
// variance in both inputs.
double pearson(std::span<const double> x, std::span<const double> y);

// Slope of the least-squares line through (0, y0), (1, y1), ...
double least_squares_slope(std::span<const double> y);

// q in [0, 1]; linear interpolation between order statistics.
double percentile(std::vector<double> xs, double q);

// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Pearson chi-square test of independence on a contingency table
// (rows x cols of counts). Empty rows/columns are dropped first.
ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& table);

}  // namespace sdve::analysis
