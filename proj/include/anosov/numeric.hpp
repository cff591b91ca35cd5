#pragma once

#include <span>
#include <vector>

namespace anosov {

// Pairwise (tree) summation. Deterministic for a fixed input order, error
// grows like O(log n), and sums of 2^k equal terms are exact.
double tree_sum(std::span<const double> xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  int points = 0;
};

// Least-squares line through (x_i, y_i).
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace anosov
