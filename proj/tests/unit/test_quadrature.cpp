#include "wxreg/errors.hpp"
#include "wxreg/polynomial.hpp"
#include "wxreg/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace wxreg;

namespace {
// int_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!
double monomial_integral(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}
}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 on [0,1]") {
    for (int n = 1; n <= 6; ++n) {
      const LineRule r = gauss_legendre(n);
      REQUIRE(r.points.size() == static_cast<std::size_t>(n));
      for (int d = 0; d <= 2 * n - 1; ++d) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], d);
        CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("triangle rule is exact to its degree with positive weights") {
    for (int degree : {1, 4, 8}) {
      const QuadratureRule r = triangle_rule(degree);
      double wsum = 0.0;
      for (double w : r.weights) {
        CHECK(w > 0.0);
        wsum += w;
      }
      CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
      for (int a = 0; a <= degree; ++a)
        for (int b = 0; a + b <= degree; ++b) {
          double s = 0.0;
          for (int q = 0; q < r.size(); ++q)
            s += r.weights[q] * std::pow(r.points[q].x(), a) * std::pow(r.points[q].y(), b);
          CHECK(s == doctest::Approx(monomial_integral(a, b)).epsilon(1e-13));
        }
    }
  }

  TEST_CASE("degree-8 rule has 25 points") { CHECK(triangle_rule(8).size() == 25); }
}

TEST_SUITE("polynomial") {
  TEST_CASE("evaluation, derivative and degree") {
    Polynomial2 p = Polynomial2::monomial(3, 1, 2.0) + Polynomial2::constant(-1.0);
    CHECK(p(2.0, 3.0) == doctest::Approx(2.0 * 8 * 3 - 1));
    CHECK(p.degree() == 4);
    const Polynomial2 d = p.derivative(2, 1);
    CHECK(d(5.0, 7.0) == doctest::Approx(12.0 * 5.0));
    CHECK(Polynomial2().degree() == -1);
  }

  TEST_CASE("products multiply and overflow is rejected") {
    const Polynomial2 x = Polynomial2::monomial(1, 0), y = Polynomial2::monomial(0, 1);
    const Polynomial2 b = x * y * (Polynomial2::constant(1.0) + (-1.0) * x + (-1.0) * y);
    CHECK(b(0.25, 0.25) == doctest::Approx(0.0625 * 0.5));
    CHECK_THROWS_AS(Polynomial2::monomial(5, 0) * Polynomial2::monomial(0, 4), PreconditionViolation);
  }
}
