#include "wxreg/polynomial.hpp"

#include "wxreg/errors.hpp"

namespace wxreg {

Polynomial2 Polynomial2::monomial(int px, int py, double coeff) {
  if (px < 0 || py < 0 || px + py > kMaxDegree) throw PreconditionViolation("monomial degree out of range");
  Polynomial2 p;
  p.coeff(px, py) = coeff;
  return p;
}

double Polynomial2::operator()(double x, double y) const {
  // Horner in x of polynomials in y.
  double result = 0.0;
  for (int i = kMaxDegree; i >= 0; --i) {
    double inner = 0.0;
    for (int j = kMaxDegree - i; j >= 0; --j) inner = inner * y + coeffs_[index(i, j)];
    result = result * x + inner;
  }
  return result;
}

Polynomial2 Polynomial2::derivative(int dx, int dy) const {
  Polynomial2 out;
  for (int i = dx; i <= kMaxDegree; ++i) {
    for (int j = dy; i + j <= kMaxDegree; ++j) {
      const double c = coeffs_[index(i, j)];
      if (c == 0.0) continue;
      double factor = 1.0;
      for (int k = 0; k < dx; ++k) factor *= i - k;
      for (int k = 0; k < dy; ++k) factor *= j - k;
      out.coeffs_[index(i - dx, j - dy)] = factor * c;
    }
  }
  return out;
}

int Polynomial2::degree() const {
  int deg = -1;
  for (int i = 0; i <= kMaxDegree; ++i)
    for (int j = 0; i + j <= kMaxDegree; ++j)
      if (coeffs_[index(i, j)] != 0.0) deg = std::max(deg, i + j);
  return deg;
}

Polynomial2& Polynomial2::operator+=(const Polynomial2& other) {
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

Polynomial2& Polynomial2::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Polynomial2 operator*(const Polynomial2& a, const Polynomial2& b) {
  if (a.degree() + b.degree() > Polynomial2::kMaxDegree)
    throw PreconditionViolation("polynomial product exceeds the maximum degree");
  Polynomial2 out;
  constexpr int n = Polynomial2::kMaxDegree;
  for (int i1 = 0; i1 <= n; ++i1)
    for (int j1 = 0; i1 + j1 <= n; ++j1) {
      const double ca = a.coeff(i1, j1);
      if (ca == 0.0) continue;
      for (int i2 = 0; i1 + i2 <= n; ++i2)
        for (int j2 = 0; i1 + j1 + i2 + j2 <= n; ++j2) {
          const double cb = b.coeff(i2, j2);
          if (cb != 0.0) out.coeff(i1 + i2, j1 + j2) += ca * cb;
        }
    }
  return out;
}

}  // namespace wxreg
