#pragma once

#include "wxreg/mesh.hpp"
#include "wxreg/quadrature.hpp"
#include "wxreg/wuxu_element.hpp"

#include <Eigen/Sparse>

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace wxreg {

/// Symmetric sparse matrix (column-compressed; symmetric, so the row layout
/// is the same data).
using SparseOperator = Eigen::SparseMatrix<double>;

/// Global numbering for the standard Wu-Xu space on a mesh.
/// Scalar DOFs: vertex v owns 3v (value), 3v+1 (d/dx), 3v+2 (d/dy); edge e
/// owns 3*nv + e (second normal moment). Vector DOFs interleave the two
/// components: 2*scalar + component.
class DofMap {
 public:
  DofMap() = default;
  explicit DofMap(const Mesh& mesh);

  int num_scalar_dofs() const { return 3 * num_vertices_ + num_edges_; }
  int num_dofs() const { return 2 * num_scalar_dofs(); }

  int vertex_dof(int vertex, int k) const { return 3 * vertex + k; }
  int edge_dof(int edge) const { return 3 * num_vertices_ + edge; }
  static int vector_dof(int scalar_dof, int component) { return 2 * scalar_dof + component; }

  /// Scalar DOFs of a cell in element node order.
  const std::array<int, 12>& cell_dofs(int cell) const { return cell_dofs_[cell]; }

  /// Scalar DOFs clamped by the Dirichlet condition.
  const std::vector<int>& boundary_scalar_dofs() const { return boundary_scalar_; }
  bool is_boundary_scalar(int dof) const { return is_boundary_[dof]; }
  /// Vector DOFs clamped by the Dirichlet condition, ascending.
  std::vector<int> boundary_dofs() const;

 private:
  int num_vertices_ = 0;
  int num_edges_ = 0;
  std::vector<std::array<int, 12>> cell_dofs_;
  std::vector<int> boundary_scalar_;
  std::vector<bool> is_boundary_;
};

/// Reference element with its tabulation at the volume quadrature points,
/// shared by all assemblies.
struct ElementCache {
  ReferenceElement ref;
  QuadratureRule rule;     // exact to degree 8
  DerivativeTable table;   // reference basis, orders <= 3, at rule.points
  /// The same table as one (derivative x basis) block per point.
  std::vector<Eigen::Matrix<double, 10, 12>> blocks;
};

/// Lazily built, immutable, thread-safe.
const ElementCache& standard_element_cache();

struct AssemblyOptions {
  /// Clamp boundary DOFs (identity rows and columns).
  bool apply_boundary_conditions = true;
};

/// Per-component stiffness of
///   a(u, v) = sum_K int_K u v + 3a grad u . grad v + 3a^2 lap u lap v + a^3 grad lap u . grad lap v.
/// Dimension num_scalar_dofs().
SparseOperator assemble_scalar_operator(const Mesh& mesh, const DofMap& dofs, double alpha,
                                        AssemblyOptions options = {});

/// Vector operator in the interleaved layout; block diagonal over components.
SparseOperator assemble_operator(const Mesh& mesh, const DofMap& dofs, double alpha, AssemblyOptions options = {});

/// Interpolant of a scalar function through the physical nodes. Edge moments
/// are taken with the unit normal of the global edge tangent.
Eigen::VectorXd interpolate_scalar(const Mesh& mesh, const DofMap& dofs, const JetFunction& f);

/// Interpolant of (fx, fy) in the interleaved vector layout.
Eigen::VectorXd interpolate(const Mesh& mesh, const DofMap& dofs, const JetFunction& fx, const JetFunction& fy);

/// Splits an interleaved vector into its two scalar components and back.
std::array<Eigen::VectorXd, 2> split_components(const Eigen::VectorXd& vector_dofs);
Eigen::VectorXd merge_components(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Values and derivatives (orders <= max_order, see derivative_index) of a
/// scalar finite element function at physical points of one cell. Row p
/// belongs to points[p].
Eigen::MatrixXd evaluate_in_cell(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& scalar_dofs, int cell,
                                 std::span<const Vec2> points, int max_order);

/// Curve load of the momentum equation on the current mesh:
///   sum_f 0.5 * (F_a^{-T} + F_b^{-T}) n0_f p_f . v(q_t) L0_f
/// with half of each facet load going to each adjacent cell. Interleaved
/// vector layout, boundary entries zeroed.
Eigen::VectorXd assemble_curve_rhs(const Mesh& mesh0, const Mesh& mesh_t, const CurveLoop& curve,
                                   std::span<const double> momentum, const DofMap& dofs);

/// Sets the entries of `b` at the given DOFs to zero.
void zero_dofs(Eigen::VectorXd& b, std::span<const int> dofs);

/// Cholesky factorization with residual-checked solves.
class SpdSolver {
 public:
  /// Throws NotPositiveDefinite if the factorization breaks down.
  explicit SpdSolver(const SparseOperator& A);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// Solution with ||A x - b|| <= 1e-10 ||b||, refined with residuals
  /// accumulated in extended precision. When 1e-10 lies below what a double
  /// vector can represent (eps || |A| |x| || / ||b||, the floor) a residual
  /// within twice the floor is accepted. Throws NotConverged otherwise.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  /// Relative residual ||A x - b|| / ||b|| of the last solve.
  double last_residual() const { return last_residual_; }
  /// Working-precision floor eps || |A| |x| || / ||b|| of the last solve.
  double last_floor() const { return last_floor_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  mutable double last_residual_ = 0.0;
  mutable double last_floor_ = 0.0;
};

/// One-shot factorize and solve.
Eigen::VectorXd solve_spd(const SparseOperator& A, const Eigen::VectorXd& b);

}  // namespace wxreg
