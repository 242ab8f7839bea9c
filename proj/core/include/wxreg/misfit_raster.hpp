#pragma once

#include "wxreg/mesh.hpp"
#include "wxreg/types.hpp"

#include <vector>

namespace wxreg {

/// Uniform cell-centred grid. Cell (i, j) has index j * nx + i, with i along x.
struct RasterSpec {
  Vec2 lo = Vec2(-10.0, -10.0);
  Vec2 hi = Vec2(10.0, 10.0);
  int nx = 128;
  int ny = 128;

  /// Bounding box of the mesh with the given resolution.
  static RasterSpec from_mesh(const Mesh& mesh, int nx = 128, int ny = 128);

  /// Throws ConfigError.
  void validate() const;

  int size() const { return nx * ny; }
  double dx() const { return (hi.x() - lo.x()) / nx; }
  double dy() const { return (hi.y() - lo.y()) / ny; }
  double weight() const { return dx() * dy(); }
  Vec2 cell_center(int i, int j) const { return {lo.x() + (i + 0.5) * dx(), lo.y() + (j + 0.5) * dy()}; }

  bool operator==(const RasterSpec&) const = default;
};

struct RasterField {
  RasterSpec spec;
  std::vector<double> values;

  RasterField() = default;
  explicit RasterField(const RasterSpec& s, double fill = 0.0) : spec(s), values(s.size(), fill) {}

  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * spec.nx + i]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * spec.nx + i]; }
};

struct Smoother {
  double kappa = 10.0;
  double tolerance = 1e-8;
  int max_iterations = 20000;

  void validate() const;
};

/// 1 at cell centres with nonzero winding number with respect to the polygon.
RasterField rasterize_indicator(const Polygon& polygon, const RasterSpec& spec);

/// Solves (I - kappa Lap_h) tau = f, 5-point Laplacian with reflecting
/// (Neumann) ghost cells, by Jacobi-preconditioned conjugate gradients.
/// Throws NotConverged.
RasterField smooth(const RasterField& f, const Smoother& s);

/// sum_i a_i b_i w in index order. Throws ShapeMismatch.
double l2_inner(const RasterField& a, const RasterField& b);

/// Winding number of the closed polygon around p.
int winding_number(const Polygon& polygon, const Vec2& p);

}  // namespace wxreg
