#include "fpsi/fem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fpsi {

namespace {

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

LineRule gauss_line(int n_points) {
  if (n_points < 1) throw std::invalid_argument("gauss_line: need at least one point");
  std::vector<double> x, w;
  gauss_legendre(n_points, x, w);
  LineRule r;
  r.points.resize(n_points);
  r.weights.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    r.points[i] = 0.5 * (x[i] + 1.0);
    r.weights[i] = 0.5 * w[i];
  }
  return r;
}

LineRule line_rule_for_degree(int degree) { return gauss_line(std::max(1, (degree + 2) / 2)); }

QuadratureRule quadrature(int degree) {
  if (degree < 1 || degree > 8) {
    throw std::invalid_argument("quadrature: unsupported degree " + std::to_string(degree) +
                                " (supported: 1..8)");
  }
  // Collapsed (Duffy) tensor rule: x = u, y = (1 - u) v, Jacobian (1 - u).
  // The u-integrand gains one degree from the Jacobian.
  const int n = (degree + 3) / 2;
  const LineRule g = gauss_line(n);
  QuadratureRule q;
  q.exactness_degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = g.points[i];
      const double v = g.points[j];
      q.points.push_back({u, (1.0 - u) * v});
      q.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return q;
}

}  // namespace fpsi
