#pragma once

#include "wxreg/types.hpp"

#include <array>

namespace wxreg {

/// Dense bivariate polynomial sum_{i+j<=8} c_ij x^i y^j.
class Polynomial2 {
 public:
  static constexpr int kMaxDegree = 8;

  Polynomial2() { coeffs_.fill(0.0); }

  static Polynomial2 monomial(int px, int py, double coeff = 1.0);
  static Polynomial2 constant(double value) { return monomial(0, 0, value); }

  double coeff(int px, int py) const { return coeffs_[index(px, py)]; }
  double& coeff(int px, int py) { return coeffs_[index(px, py)]; }

  double operator()(double x, double y) const;
  double operator()(const Vec2& p) const { return (*this)(p.x(), p.y()); }

  /// d^{dx+dy} / dx^dx dy^dy
  Polynomial2 derivative(int dx, int dy) const;

  /// Highest total degree with a nonzero coefficient, -1 for the zero polynomial.
  int degree() const;

  Polynomial2& operator+=(const Polynomial2& other);
  Polynomial2& operator*=(double s);
  friend Polynomial2 operator+(Polynomial2 a, const Polynomial2& b) { return a += b; }
  friend Polynomial2 operator*(Polynomial2 a, double s) { return a *= s; }
  friend Polynomial2 operator*(double s, Polynomial2 a) { return a *= s; }
  /// Throws PreconditionViolation if the product exceeds kMaxDegree.
  friend Polynomial2 operator*(const Polynomial2& a, const Polynomial2& b);

 private:
  static constexpr int index(int px, int py) { return px * (kMaxDegree + 1) + py; }
  std::array<double, (kMaxDegree + 1) * (kMaxDegree + 1)> coeffs_;
};

}  // namespace wxreg
