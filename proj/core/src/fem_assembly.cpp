#include "wxreg/fem_assembly.hpp"

#include "wxreg/errors.hpp"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wxreg {

DofMap::DofMap(const Mesh& mesh) : num_vertices_(mesh.num_vertices()), num_edges_(mesh.num_edges()) {
  const MeshTopology& topo = mesh.topology();
  cell_dofs_.resize(topo.num_cells());
  for (int c = 0; c < topo.num_cells(); ++c) {
    auto& d = cell_dofs_[c];
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) d[3 * k + j] = vertex_dof(topo.cells[c][k], j);
    for (int i = 0; i < 3; ++i) d[9 + i] = edge_dof(topo.cell_edges[c][i]);
  }
  is_boundary_.assign(num_scalar_dofs(), false);
  for (int v = 0; v < num_vertices_; ++v)
    if (topo.boundary_vertex[v])
      for (int j = 0; j < 3; ++j) is_boundary_[vertex_dof(v, j)] = true;
  for (int e = 0; e < num_edges_; ++e)
    if (topo.boundary_edge[e]) is_boundary_[edge_dof(e)] = true;
  for (int d = 0; d < num_scalar_dofs(); ++d)
    if (is_boundary_[d]) boundary_scalar_.push_back(d);
}

std::vector<int> DofMap::boundary_dofs() const {
  std::vector<int> out;
  out.reserve(2 * boundary_scalar_.size());
  for (int d : boundary_scalar_) {
    out.push_back(vector_dof(d, 0));
    out.push_back(vector_dof(d, 1));
  }
  return out;
}

const ElementCache& standard_element_cache() {
  static const ElementCache cache = [] {
    ElementCache c{build_reference_element(ElementKind::standard), triangle_rule(8), {}, {}};
    c.table = tabulate(c.ref, c.rule.points, 3);
    c.blocks.resize(c.rule.size());
    for (int q = 0; q < c.rule.size(); ++q)
      for (int j = 0; j < 12; ++j)
        for (int d = 0; d < 10; ++d) c.blocks[q](d, j) = c.table(q, j, d);
    return c;
  }();
  return cache;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

Eigen::Matrix<double, 12, 12> element_matrix(const ElementCache& cache, const CellGeometry& geom, double alpha) {
  const TransformMatrices tm = transform(cache.ref, geom);
  const Eigen::Matrix<double, 12, 12> Mt = tm.M.transpose();
  const Eigen::Matrix<double, 10, 10> T = derivative_chain(geom.J_inv, 3);
  const double a1 = 3.0 * alpha, a2 = 3.0 * alpha * alpha, a3 = alpha * alpha * alpha;
  constexpr int ix = derivative_index(1, 0), iy = derivative_index(0, 1);
  constexpr int ixx = derivative_index(2, 0), iyy = derivative_index(0, 2);
  constexpr int ixxx = derivative_index(3, 0), ixxy = derivative_index(2, 1);
  constexpr int ixyy = derivative_index(1, 2), iyyy = derivative_index(0, 3);

  // Rows: value, d/dx, d/dy, Laplacian, d/dx Laplacian, d/dy Laplacian.
  Eigen::Matrix<double, 6, 10> S = Eigen::Matrix<double, 6, 10>::Zero();
  S(0, 0) = 1.0;
  S(1, ix) = 1.0;
  S(2, iy) = 1.0;
  S(3, ixx) = S(3, iyy) = 1.0;
  S(4, ixxx) = S(4, ixyy) = 1.0;
  S(5, ixxy) = S(5, iyyy) = 1.0;
  const Eigen::Matrix<double, 6, 1> c(1.0, a1, a1, a2, a3, a3);
  const Eigen::Matrix<double, 6, 10> ST = S * T;

  // Accumulate against the pulled-back reference basis, then apply M once.
  Eigen::Matrix<double, 12, 12> Kref = Eigen::Matrix<double, 12, 12>::Zero();
  for (int q = 0; q < cache.rule.size(); ++q) {
    const double w = cache.rule.weights[q] * std::abs(geom.det_J);
    const Eigen::Matrix<double, 6, 12> P = ST * cache.blocks[q];
    Kref.noalias() += P.transpose() * ((w * c).asDiagonal() * P);
  }
  const Eigen::Matrix<double, 12, 12> K = Mt.transpose() * Kref * Mt;
  return 0.5 * (K + K.transpose());
}

}  // namespace

SparseOperator assemble_scalar_operator(const Mesh& mesh, const DofMap& dofs, double alpha, AssemblyOptions options) {
  if (!(alpha >= 0.0)) throw PreconditionViolation("alpha must be nonnegative");
  const ElementCache& cache = standard_element_cache();
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_cells()) * 144);
  const bool bc = options.apply_boundary_conditions;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry geom = cell_geometry(mesh, c, cache.ref);
    const auto K = element_matrix(cache, geom, alpha);
    const auto& d = dofs.cell_dofs(c);
    for (int i = 0; i < 12; ++i) {
      if (bc && dofs.is_boundary_scalar(d[i])) continue;
      for (int j = 0; j < 12; ++j) {
        if (bc && dofs.is_boundary_scalar(d[j])) continue;
        triplets.emplace_back(d[i], d[j], K(i, j));
      }
    }
  }
  if (bc)
    for (int d : dofs.boundary_scalar_dofs()) triplets.emplace_back(d, d, 1.0);
  SparseOperator A(dofs.num_scalar_dofs(), dofs.num_scalar_dofs());
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

SparseOperator assemble_operator(const Mesh& mesh, const DofMap& dofs, double alpha, AssemblyOptions options) {
  const SparseOperator S = assemble_scalar_operator(mesh, dofs, alpha, options);
  Triplets triplets;
  triplets.reserve(2 * static_cast<std::size_t>(S.nonZeros()));
  for (int k = 0; k < S.outerSize(); ++k)
    for (SparseOperator::InnerIterator it(S, k); it; ++it)
      for (int comp = 0; comp < 2; ++comp)
        triplets.emplace_back(DofMap::vector_dof(static_cast<int>(it.row()), comp),
                              DofMap::vector_dof(static_cast<int>(it.col()), comp), it.value());
  SparseOperator A(dofs.num_dofs(), dofs.num_dofs());
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

Eigen::VectorXd interpolate_scalar(const Mesh& mesh, const DofMap& dofs, const JetFunction& f) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dofs.num_scalar_dofs());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Jet j = f(mesh.vertex(v));
    out[dofs.vertex_dof(v, 0)] = j.value;
    out[dofs.vertex_dof(v, 1)] = j.gradient.x();
    out[dofs.vertex_dof(v, 2)] = j.gradient.y();
  }
  const LineRule rule = gauss_legendre(4);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Vec2& a = mesh.vertex(mesh.edge(e)[0]);
    const Vec2& b = mesh.vertex(mesh.edge(e)[1]);
    const Vec2 t = (b - a).normalized();
    const Vec2 n(t.y(), -t.x());
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Jet j = f(a + rule.points[q] * (b - a));
      acc += rule.weights[q] * n.dot(j.hessian * n);
    }
    out[dofs.edge_dof(e)] = (b - a).norm() * acc;
  }
  return out;
}

Eigen::VectorXd interpolate(const Mesh& mesh, const DofMap& dofs, const JetFunction& fx, const JetFunction& fy) {
  return merge_components(interpolate_scalar(mesh, dofs, fx), interpolate_scalar(mesh, dofs, fy));
}

std::array<Eigen::VectorXd, 2> split_components(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size() / 2;
  std::array<Eigen::VectorXd, 2> out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out[0][i] = v[2 * i];
    out[1][i] = v[2 * i + 1];
  }
  return out;
}

Eigen::VectorXd merge_components(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ShapeMismatch("component vectors differ in length");
  Eigen::VectorXd out(2 * x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[2 * i] = x[i];
    out[2 * i + 1] = y[i];
  }
  return out;
}

Eigen::MatrixXd evaluate_in_cell(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& scalar_dofs, int cell,
                                 std::span<const Vec2> points, int max_order) {
  if (scalar_dofs.size() != dofs.num_scalar_dofs()) throw ShapeMismatch("scalar DOF vector has the wrong length");
  const ElementCache& cache = standard_element_cache();
  const CellGeometry geom = cell_geometry(mesh, cell, cache.ref);
  const TransformMatrices tm = transform(cache.ref, geom);
  const DerivativeTable P = physical_tabulate(cache.ref, tm, geom, points, max_order);
  const auto& d = dofs.cell_dofs(cell);
  const int nd = num_derivatives(max_order);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), nd);
  for (int p = 0; p < static_cast<int>(points.size()); ++p)
    for (int j = 0; j < 12; ++j)
      for (int k = 0; k < nd; ++k) out(p, k) += scalar_dofs[d[j]] * P(p, j, k);
  return out;
}

Eigen::VectorXd assemble_curve_rhs(const Mesh& mesh0, const Mesh& mesh_t, const CurveLoop& curve,
                                   std::span<const double> momentum, const DofMap& dofs) {
  if (static_cast<int>(momentum.size()) != curve.num_facets())
    throw ShapeMismatch("momentum has " + std::to_string(momentum.size()) + " values for " +
                        std::to_string(curve.num_facets()) + " facets");
  const ElementCache& cache = standard_element_cache();
  const LineRule rule = gauss_legendre(4);
  const MeshTopology& topo = mesh_t.topology();
  const int n = curve.num_facets();

  Eigen::VectorXd b = Eigen::VectorXd::Zero(dofs.num_dofs());
  std::vector<Vec2> pts(rule.points.size());
  for (int f = 0; f < n; ++f) {
    if (momentum[f] == 0.0) continue;
    const int e = curve.edges[f];
    const auto& cells = topo.edge_cells[e];
    const Vec2& a = mesh_t.vertex(curve.vertices[f]);
    const Vec2& bb = mesh_t.vertex(curve.vertices[(f + 1) % n]);
    for (std::size_t q = 0; q < pts.size(); ++q) pts[q] = a + rule.points[q] * (bb - a);

    Mat2 FinvT = Mat2::Zero();
    int count = 0;
    for (int c : cells) {
      if (c < 0) continue;
      FinvT += deformation_gradient(mesh0, mesh_t, c).inverse().transpose();
      ++count;
    }
    FinvT /= count;
    const Vec2 g = FinvT * curve.normal0[f] * momentum[f];

    for (int c : cells) {
      if (c < 0) continue;
      const CellGeometry geom = cell_geometry(mesh_t, c, cache.ref);
      const TransformMatrices tm = transform(cache.ref, geom);
      const DerivativeTable P = physical_tabulate(cache.ref, tm, geom, pts, 0);
      const auto& d = dofs.cell_dofs(c);
      const double share = 1.0 / count;
      for (int j = 0; j < 12; ++j) {
        double s = 0.0;
        for (int q = 0; q < static_cast<int>(pts.size()); ++q) s += rule.weights[q] * P(q, j, 0);
        s *= share * curve.length0[f];
        b[DofMap::vector_dof(d[j], 0)] += s * g.x();
        b[DofMap::vector_dof(d[j], 1)] += s * g.y();
      }
    }
  }
  const std::vector<int> bd = dofs.boundary_dofs();
  zero_dofs(b, bd);
  return b;
}

void zero_dofs(Eigen::VectorXd& b, std::span<const int> dofs) {
  for (int d : dofs) b[d] = 0.0;
}

struct SpdSolver::Impl {
  SparseOperator A;
  Eigen::SimplicialLLT<SparseOperator> llt;
};

SpdSolver::SpdSolver(const SparseOperator& A) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw ShapeMismatch("operator is not square");
  impl_->A = A;
  impl_->llt.compute(impl_->A);
  if (impl_->llt.info() != Eigen::Success) throw NotPositiveDefinite("Cholesky factorization broke down");
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

namespace {

// b - A x accumulated in extended precision, plus || |A| |x| ||, the scale
// of the rounding error any double-precision x carries.
Eigen::VectorXd residual(const SparseOperator& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                         double& abs_scale) {
  std::vector<long double> r(b.data(), b.data() + b.size());
  std::vector<long double> s(b.size(), 0.0L);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseOperator::InnerIterator it(A, k); it; ++it) {
      const long double t = static_cast<long double>(it.value()) * static_cast<long double>(x[it.col()]);
      r[it.row()] -= t;
      s[it.row()] += t < 0 ? -t : t;
    }
  Eigen::VectorXd out(b.size());
  long double ss = 0.0L;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    out[i] = static_cast<double>(r[i]);
    ss += s[i] * s[i];
  }
  abs_scale = static_cast<double>(std::sqrt(ss));
  return out;
}

}  // namespace

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  constexpr double kTolerance = 1e-10;
  constexpr int kRefinements = 4;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  if (b.size() != impl_->A.rows()) throw ShapeMismatch("right-hand side has the wrong length");
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    last_residual_ = 0.0;
    last_floor_ = 0.0;
    return Eigen::VectorXd::Zero(b.size());
  }
  double scale = 0.0;
  Eigen::VectorXd x = impl_->llt.solve(b);
  Eigen::VectorXd r = residual(impl_->A, x, b, scale);
  last_residual_ = r.norm() / bnorm;
  for (int k = 0; k < kRefinements && last_residual_ > 0.01 * kTolerance; ++k) {
    const Eigen::VectorXd candidate = x + impl_->llt.solve(r);
    double cscale = 0.0;
    Eigen::VectorXd cr = residual(impl_->A, candidate, b, cscale);
    if (!(cr.norm() < r.norm())) break;
    x = candidate;
    r = std::move(cr);
    scale = cscale;
    last_residual_ = r.norm() / bnorm;
  }
  last_floor_ = kEps * scale / bnorm;
  if (!(last_residual_ <= std::max(kTolerance, 2.0 * last_floor_)))
    throw NotConverged(fmt::format("relative residual {:.3g} after refinement (working-precision floor {:.3g})",
                                   last_residual_, last_floor_));
  return x;
}

Eigen::VectorXd solve_spd(const SparseOperator& A, const Eigen::VectorXd& b) { return SpdSolver(A).solve(b); }

}  // namespace wxreg
