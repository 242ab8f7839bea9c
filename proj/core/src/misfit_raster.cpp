#include "wxreg/misfit_raster.hpp"

#include "wxreg/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <string>

namespace wxreg {

RasterSpec RasterSpec::from_mesh(const Mesh& mesh, int nx, int ny) {
  const auto [lo, hi] = mesh.bounding_box();
  RasterSpec s{lo, hi, nx, ny};
  s.validate();
  return s;
}

void RasterSpec::validate() const {
  if (nx < 8 || ny < 8) throw ConfigError("raster needs at least 8 cells per direction");
  if (!(hi.x() > lo.x()) || !(hi.y() > lo.y())) throw ConfigError("raster box is degenerate");
}

void Smoother::validate() const {
  if (!(kappa > 0.0)) throw ConfigError("smoother kappa must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("smoother tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("smoother needs at least one iteration");
}

int winding_number(const Polygon& polygon, const Vec2& p) {
  int wn = 0;
  const std::size_t n = polygon.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& a = polygon[k];
    const Vec2& b = polygon[(k + 1) % n];
    const double side = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && side > 0.0) ++wn;
    } else if (b.y() <= p.y() && side < 0.0) {
      --wn;
    }
  }
  return wn;
}

RasterField rasterize_indicator(const Polygon& polygon, const RasterSpec& spec) {
  spec.validate();
  RasterField out(spec);
  if (polygon.size() < 3) return out;
  Vec2 lo = polygon.front(), hi = polygon.front();
  for (const Vec2& v : polygon) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      const Vec2 c = spec.cell_center(i, j);
      if (c.x() < lo.x() || c.x() > hi.x() || c.y() < lo.y() || c.y() > hi.y()) continue;
      if (winding_number(polygon, c) != 0) out.at(i, j) = 1.0;
    }
  return out;
}

RasterField smooth(const RasterField& f, const Smoother& s) {
  s.validate();
  const RasterSpec& spec = f.spec;
  const int nx = spec.nx, ny = spec.ny;
  if (static_cast<int>(f.values.size()) != spec.size()) throw ShapeMismatch("raster values do not match the spec");
  const double cx = s.kappa / (spec.dx() * spec.dx());
  const double cy = s.kappa / (spec.dy() * spec.dy());

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(5 * static_cast<std::size_t>(spec.size()));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      double diag = 1.0;
      // A ghost cell mirrors its neighbour, so that coupling drops out.
      if (i > 0) { t.emplace_back(k, k - 1, -cx); diag += cx; }
      if (i < nx - 1) { t.emplace_back(k, k + 1, -cx); diag += cx; }
      if (j > 0) { t.emplace_back(k, k - nx, -cy); diag += cy; }
      if (j < ny - 1) { t.emplace_back(k, k + nx, -cy); diag += cy; }
      t.emplace_back(k, k, diag);
    }
  Eigen::SparseMatrix<double> A(spec.size(), spec.size());
  A.setFromTriplets(t.begin(), t.end());

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(s.tolerance);
  cg.setMaxIterations(s.max_iterations);
  cg.compute(A);
  const Eigen::Map<const Eigen::VectorXd> rhs(f.values.data(), spec.size());
  RasterField out(spec);
  if (rhs.squaredNorm() == 0.0) return out;
  Eigen::Map<Eigen::VectorXd> x(out.values.data(), spec.size());
  x = cg.solve(rhs);
  if (cg.info() != Eigen::Success)
    throw NotConverged("smoother CG stopped at residual " + std::to_string(cg.error()) + " after " +
                       std::to_string(cg.iterations()) + " iterations");
  return out;
}

double l2_inner(const RasterField& a, const RasterField& b) {
  if (!(a.spec == b.spec) || a.values.size() != b.values.size()) throw ShapeMismatch("rasters have different specs");
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += a.values[k] * b.values[k];
  return s * a.spec.weight();
}

}  // namespace wxreg
