#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace phplate {

/// One-dimensional quadrature rule on a reference interval.
struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

namespace detail {

// Legendre polynomial P_n and its derivative at x in (-1, 1).
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace detail

/// Gauss-Legendre rule with `n` points on [0, 1]; exact for polynomials of
/// degree 2n - 1.
inline QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = detail::legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre(n, x).second;
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // halved for [0, 1]
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.5;
  return rule;
}

/// Number of Gauss points integrating a polynomial of `degree` exactly.
inline int gauss_points_for_degree(int degree) { return degree / 2 + 1; }

/// Composite Gauss rule on [lo, hi] split into `pieces` equal subintervals.
inline QuadratureRule1D composite_gauss(double lo, double hi, int n, int pieces) {
  const auto base = gauss_legendre(n);
  QuadratureRule1D rule;
  const double h = (hi - lo) / pieces;
  for (int p = 0; p < pieces; ++p) {
    for (std::size_t q = 0; q < base.size(); ++q) {
      rule.points.push_back(lo + h * (p + base.points[q]));
      rule.weights.push_back(h * base.weights[q]);
    }
  }
  return rule;
}

}  // namespace phplate
