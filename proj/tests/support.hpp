#pragma once

#include "wxreg/mesh.hpp"
#include "wxreg/polynomial.hpp"
#include "wxreg/types.hpp"
#include "wxreg/wuxu_element.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace wxreg::test {

/// Triangle with all angles above min_angle (radians), random size and
/// position, counterclockwise.
inline std::array<Vec2, 3> random_triangle(std::mt19937_64& rng, double min_angle = 0.35) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.2, 3.0);
  for (;;) {
    std::array<Vec2, 3> v{Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng))};
    if (triangle_area(v[0], v[1], v[2]) < 0) std::swap(v[1], v[2]);
    bool ok = std::abs(triangle_area(v[0], v[1], v[2])) > 1e-3;
    for (int i = 0; i < 3 && ok; ++i) {
      const Vec2 a = v[(i + 1) % 3] - v[i], b = v[(i + 2) % 3] - v[i];
      ok = std::acos(a.normalized().dot(b.normalized())) > min_angle;
    }
    if (!ok) continue;
    const double s = scale(rng);
    const Vec2 shift(3.0 * u(rng), 3.0 * u(rng));
    for (auto& p : v) p = s * p + shift;
    return v;
  }
}

/// Uniformly distributed point strictly inside the triangle.
inline Vec2 random_interior_point(std::mt19937_64& rng, const std::array<Vec2, 3>& v) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double a = u(rng), b = u(rng);
  if (a + b > 0.95) {
    a = 0.95 - a;
    b = 0.95 - b;
  }
  a = std::max(a, 0.02);
  b = std::max(b, 0.02);
  return v[0] + a * (v[1] - v[0]) + b * (v[2] - v[0]);
}

inline Polynomial2 random_cubic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Polynomial2 p;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j) p.coeff(i, j) = u(rng);
  return p;
}

inline Jet jet_of(const Polynomial2& p, const Vec2& x) {
  Jet j;
  j.value = p(x);
  j.gradient = Vec2(p.derivative(1, 0)(x), p.derivative(0, 1)(x));
  const double hxy = p.derivative(1, 1)(x);
  j.hessian << p.derivative(2, 0)(x), hxy, hxy, p.derivative(0, 2)(x);
  return j;
}

inline JetFunction jet_function(const Polynomial2& p) {
  return [p](const Vec2& x) { return jet_of(p, x); };
}

/// [0, 2]^2 split into n x n squares, each cut along its rising diagonal.
inline Mesh square_mesh(int n, double side = 2.0) {
  std::vector<Vec2> v;
  std::vector<std::array<int, 3>> c;
  const double h = side / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.emplace_back(i * h, j * h);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      c.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      c.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Mesh::from_cells(std::move(v), std::move(c));
}

/// Part of the polygon inside the half-plane n . x >= 0.
inline Polygon clip_half_plane(const Polygon& poly, const Vec2& n) {
  Polygon out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % m];
    const double da = n.dot(a), db = n.dot(b);
    if (da >= 0) out.push_back(a);
    if ((da >= 0) != (db >= 0)) out.push_back(a + (da / (da - db)) * (b - a));
  }
  return out;
}

/// Enclosed areas in the quadrants (+,+), (-,+), (-,-), (+,-).
inline std::array<double, 4> quadrant_areas(const Polygon& poly) {
  std::array<double, 4> out{};
  const std::array<Vec2, 4> sx{Vec2(1, 0), Vec2(-1, 0), Vec2(-1, 0), Vec2(1, 0)};
  const std::array<Vec2, 4> sy{Vec2(0, 1), Vec2(0, 1), Vec2(0, -1), Vec2(0, -1)};
  for (int q = 0; q < 4; ++q) out[q] = polygon_area(clip_half_plane(clip_half_plane(poly, sx[q]), sy[q]));
  return out;
}

/// Symmetric Hausdorff distance between the vertex sets of two polygons,
/// measured against the other polygon's edges.
inline double hausdorff(const Polygon& a, const Polygon& b) {
  auto one_sided = [](const Polygon& p, const Polygon& q) {
    double worst = 0.0;
    for (const Vec2& x : p) {
      double best = INFINITY;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const Vec2& s = q[i];
        const Vec2 d = q[(i + 1) % q.size()] - s;
        const double t = std::clamp((x - s).dot(d) / d.squaredNorm(), 0.0, 1.0);
        best = std::min(best, (s + t * d - x).norm());
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace wxreg::test
