#include "wxreg/mesh.hpp"

#include "delaunay.hpp"
#include "wxreg/errors.hpp"

#include <cmath>
#include <numbers>

namespace wxreg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRingGrowth = 1.3;
const double kRowFactor = std::sqrt(3.0) / 2.0;

int ring_count(double radius, double spacing) {
  const int quarter = static_cast<int>(std::lround(2.0 * kPi * radius / (4.0 * spacing)));
  return 4 * std::max(1, quarter);
}

// Ring of `count` points; odd rings are rotated by half a step so that
// neighbouring rings never form cocircular trapezoids.
void add_ring(std::vector<Vec2>& points, double radius, int count, bool staggered) {
  const double offset = staggered ? kPi / count : 0.0;
  for (int k = 0; k < count; ++k) {
    const double a = offset + 2.0 * kPi * k / count;
    points.emplace_back(radius * std::cos(a), radius * std::sin(a));
  }
}

}  // namespace

TemplateMesh generate_template_mesh(const MeshGenConfig& config) {
  config.validate();
  const double L = config.half_width;
  const double h = config.h;
  const double r = config.radius;
  const int n = config.segments;
  const double s0 = 2.0 * r * std::sin(kPi / n);

  std::vector<Vec2> points = {{-L, -L}, {L, -L}, {L, L}, {-L, L}};

  // Square sides, corners excluded.
  const int per_side = std::max(1, static_cast<int>(std::ceil(2.0 * L / h - 1e-9)));
  for (int side = 0; side < 4; ++side) {
    const Vec2 a = points[side];
    const Vec2 b = points[(side + 1) % 4];
    for (int k = 1; k < per_side; ++k) points.push_back(a + (b - a) * (static_cast<double>(k) / per_side));
  }

  // The template polygon itself.
  const int curve_start = static_cast<int>(points.size());
  add_ring(points, r, n, false);

  // Inner rings at the curve spacing, then the centre.
  {
    const double step = s0 * kRowFactor;
    bool staggered = true;
    for (double rho = r - step; rho > 0.75 * s0; rho -= step) {
      add_ring(points, rho, ring_count(rho, s0), staggered);
      staggered = !staggered;
    }
    points.emplace_back(0.0, 0.0);
  }

  // Outer rings, spacing graded geometrically from s0 up to h.
  double rho = r;
  double spacing = s0;
  bool staggered = true;
  int rings_at_h = 0;
  while (rings_at_h < 1) {
    const double next_spacing = std::min(h, spacing * kRingGrowth);
    const double next_rho = rho + 0.5 * (spacing + next_spacing) * kRowFactor;
    if (next_rho > L - 0.75 * h) break;
    add_ring(points, next_rho, ring_count(next_rho, next_spacing), staggered);
    staggered = !staggered;
    rho = next_rho;
    spacing = next_spacing;
    if (spacing >= h) ++rings_at_h;
  }

  // Hexagonal background lattice, symmetric under x -> -x and y -> -y.
  const double row_height = h * kRowFactor;
  const int rows = static_cast<int>(std::floor(L / row_height));
  const int cols = static_cast<int>(std::floor(L / h)) + 1;
  const double clear_radius = rho + 0.8 * h;
  const double margin = 0.5 * h;
  for (int j = -rows; j <= rows; ++j) {
    const double y = j * row_height;
    const double shift = (std::abs(j) % 2 == 1) ? 0.5 * h : 0.0;
    for (int i = -cols; i <= cols; ++i) {
      const double x = i * h + shift;
      if (std::abs(x) > L - margin || std::abs(y) > L - margin) continue;
      if (std::hypot(x, y) < clear_radius) continue;
      points.emplace_back(x, y);
    }
  }

  auto cells = detail::delaunay_in_box(points);
  Mesh mesh = Mesh::from_cells(std::move(points), std::move(cells));

  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) total += mesh.cell_area(c);
  if (std::abs(total - 4.0 * L * L) > 1e-9 * L * L)
    throw GenerationFailure("triangulation does not cover the square (area " + std::to_string(total) + ")");

  std::vector<std::array<int, 2>> segments;
  for (int k = 0; k < n; ++k) segments.push_back({curve_start + k, curve_start + (k + 1) % n});
  CurveLoop curve;
  try {
    curve = build_curve_loop(mesh, segments);
  } catch (const Error& e) {
    throw GenerationFailure(std::string("template polygon is not embedded in the mesh: ") + e.what());
  }
  return {std::move(mesh), std::move(curve)};
}

}  // namespace wxreg
