#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace wxreg {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Closed polygon; the last vertex connects back to the first.
using Polygon = std::vector<Vec2>;

/// Signed area by the shoelace formula, positive for counterclockwise loops.
double polygon_area(const Polygon& polygon);

/// Signed area of the triangle (a, b, c), positive when counterclockwise.
inline double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace wxreg
