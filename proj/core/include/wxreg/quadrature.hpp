#pragma once

#include "wxreg/types.hpp"

#include <vector>

namespace wxreg {

/// Points and weights on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Points and weights on the reference triangle {(0,0), (1,0), (0,1)}.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n-1.
LineRule gauss_legendre(int n);

/// Collapsed (Duffy) tensor-product rule on the reference triangle, exact for
/// polynomials of total degree `degree`. All weights are positive and sum to
/// 1/2.
QuadratureRule triangle_rule(int degree);

/// Gauss-Legendre rule on [0, 1] exact for polynomials of degree `degree`.
LineRule edge_rule(int degree);

}  // namespace wxreg
