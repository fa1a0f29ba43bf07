#pragma once

#include <array>
#include <vector>

namespace fpsi {

/// Rule on the reference triangle {(x, y) : x, y >= 0, x + y <= 1}.
/// Weights sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Legendre rule on [0, 1] with `n` points (exact to degree 2n - 1).
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Triangle rule exact for all polynomials of total degree <= `degree`.
/// Supported degrees are 1..8; anything else throws std::invalid_argument.
QuadratureRule quadrature(int degree);

LineRule gauss_line(int n_points);

/// Line rule exact for polynomials up to `degree` on [0, 1].
LineRule line_rule_for_degree(int degree);

}  // namespace fpsi
