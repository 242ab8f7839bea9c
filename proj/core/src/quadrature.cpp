#include "wxreg/quadrature.hpp"

#include "wxreg/errors.hpp"

#include <cmath>
#include <numbers>

namespace wxreg {

LineRule gauss_legendre(int n) {
  if (n < 1) throw PreconditionViolation("Gauss-Legendre rule needs at least one point");
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] -> [0, 1], ascending order.
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

LineRule edge_rule(int degree) { return gauss_legendre(std::max(1, (degree + 2) / 2)); }

QuadratureRule triangle_rule(int degree) {
  // In collapsed coordinates (a, b) -> (a (1 - b), b) the integrand picks up
  // the factor (1 - b), so the b direction needs one extra degree.
  const int n = std::max(1, (degree + 3) / 2);
  const LineRule line = gauss_legendre(n);
  QuadratureRule rule;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    const double b = line.points[j];
    for (int i = 0; i < n; ++i) {
      const double a = line.points[i];
      rule.points.emplace_back(a * (1.0 - b), b);
      rule.weights.push_back(line.weights[i] * line.weights[j] * (1.0 - b));
    }
  }
  return rule;
}

}  // namespace wxreg
