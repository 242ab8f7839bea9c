#pragma once

#include "wxreg/mesh.hpp"
#include "wxreg/polynomial.hpp"
#include "wxreg/types.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace wxreg {

// Wu-Xu H^3-nonconforming triangle. The standard element has 12 nodes
//   [u(v1), du/dx(v1), du/dy(v1), ..., u(v3), ..., mu_nn(e1), mu_nn(e2), mu_nn(e3)]
// and the robust variant 15, with the first normal moments mu_n(e1..e3)
// inserted before the second normal moments. Edge e_i is opposite vertex i;
// its tangent runs from the lower to the higher local vertex and its normal
// is the clockwise rotation n = (t_y, -t_x).
//
// Physical edge moments are plain integrals over the edge; the reference
// element uses edge averages. Physical basis functions are psi = M (psi_hat o F)
// with M = V^T and V = E V^C D assembled per cell.

enum class ElementKind { standard, robust };

constexpr int num_dofs(ElementKind kind) { return kind == ElementKind::standard ? 12 : 15; }

/// Number of partial derivatives of order <= max_order.
constexpr int num_derivatives(int max_order) { return (max_order + 1) * (max_order + 2) / 2; }
/// Position of d^{dx+dy}/dx^dx dy^dy in a derivative table:
/// order 0: f; order 1: fx, fy; order 2: fxx, fxy, fyy; order 3: fxxx, ...
constexpr int derivative_index(int dx, int dy) { return (dx + dy) * (dx + dy + 1) / 2 + dy; }

struct NodeDescriptor {
  enum class Type { point_value, derivative_x, derivative_y, normal_moment, second_normal_moment };
  Type type;
  int entity;  // local vertex or local edge
};

/// Frame of one triangle edge.
struct EdgeFrame {
  int from = 0;  // local vertex indices, from < to
  int to = 0;
  Vec2 tangent = Vec2::Zero();
  Vec2 normal = Vec2::Zero();
  double length = 0.0;
  Mat2 G = Mat2::Zero();      // rows n^T, t^T
  Mat3 Gamma = Mat3::Zero();  // Cartesian Hessian = Gamma * (nn, nt, tt)
  Mat3 Gamma_inv = Mat3::Zero();
};

/// Values and partial derivatives of a set of functions at a set of points.
class DerivativeTable {
 public:
  DerivativeTable() = default;
  DerivativeTable(int num_points, int num_functions, int max_order)
      : num_points_(num_points),
        num_functions_(num_functions),
        max_order_(max_order),
        data_(static_cast<std::size_t>(num_points) * num_functions * num_derivatives(max_order), 0.0) {}

  int num_points() const { return num_points_; }
  int num_functions() const { return num_functions_; }
  int max_order() const { return max_order_; }

  double operator()(int point, int function, int derivative) const { return data_[offset(point, function, derivative)]; }
  double& operator()(int point, int function, int derivative) { return data_[offset(point, function, derivative)]; }

  /// All derivatives of one function at one point.
  std::span<const double> derivatives(int point, int function) const {
    return {data_.data() + offset(point, function, 0), static_cast<std::size_t>(num_derivatives(max_order_))};
  }

 private:
  std::size_t offset(int point, int function, int derivative) const {
    return (static_cast<std::size_t>(point) * num_functions_ + function) * num_derivatives(max_order_) + derivative;
  }
  int num_points_ = 0;
  int num_functions_ = 0;
  int max_order_ = 0;
  std::vector<double> data_;
};

/// Nodal basis on the reference triangle {(0,0), (1,0), (0,1)}.
class ReferenceElement {
 public:
  ElementKind kind() const { return kind_; }
  int num_dofs() const { return static_cast<int>(basis_.size()); }

  /// Spanning set of W: monomials of P3, b*x, b*y (and b^2, b^2 x, b^2 y for W_r).
  const std::vector<Polynomial2>& spanning_set() const { return spanning_; }
  /// Column j holds the coefficients of basis function j in the spanning set.
  const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  const std::vector<Polynomial2>& basis() const { return basis_; }
  const std::vector<NodeDescriptor>& nodes() const { return nodes_; }

  const std::array<Vec2, 3>& vertices() const { return vertices_; }
  const std::array<EdgeFrame, 3>& edges() const { return edges_; }

  /// 2-norm condition number of the generalized Vandermonde matrix.
  double vandermonde_condition() const { return condition_; }

  /// Applies reference node i (edge moments averaged) to a polynomial.
  double apply_node(int node, const Polynomial2& p) const;

 private:
  friend ReferenceElement build_reference_element(ElementKind kind);
  ElementKind kind_ = ElementKind::standard;
  std::vector<Polynomial2> spanning_;
  Eigen::MatrixXd coefficients_;
  std::vector<Polynomial2> basis_;
  std::vector<NodeDescriptor> nodes_;
  std::array<Vec2, 3> vertices_;
  std::array<EdgeFrame, 3> edges_;
  double condition_ = 0.0;
};

/// Throws IllConditioned if the Vandermonde condition number exceeds 1e12.
ReferenceElement build_reference_element(ElementKind kind);

/// Reference basis values and derivatives up to max_order (<= 3).
DerivativeTable tabulate(const ReferenceElement& ref, std::span<const Vec2> points, int max_order);

/// Per-edge data of a physical cell.
struct EdgeGeometry : EdgeFrame {
  Mat2 B1 = Mat2::Zero();  // first-moment block of V^C
  Mat3 B2 = Mat3::Zero();  // second-moment block of V^C, ordering (nn, nt, tt)
  double beta_x = 0.0;
  double beta_y = 0.0;
};

struct CellGeometry {
  std::array<Vec2, 3> vertices;
  /// J = d(physical)/d(reference); columns are v2 - v1 and v3 - v1.
  Mat2 J = Mat2::Zero();
  Mat2 J_inv = Mat2::Zero();
  double det_J = 0.0;
  /// Cartesian Hessians: physical = Theta * reference.
  Mat3 Theta = Mat3::Zero();
  Mat3 Theta_inv = Mat3::Zero();
  std::array<EdgeGeometry, 3> edges;

  Vec2 to_physical(const Vec2& ref_point) const { return vertices[0] + J * ref_point; }
  Vec2 to_reference(const Vec2& point) const { return J_inv * (point - vertices[0]); }
};

/// Throws SingularCell for a degenerate triangle.
CellGeometry cell_geometry(const std::array<Vec2, 3>& vertices, const ReferenceElement& ref);
CellGeometry cell_geometry(const Mesh& mesh, int cell, const ReferenceElement& ref);

struct TransformMatrices {
  Eigen::MatrixXd D;   // completed nodes in terms of the element nodes
  Eigen::MatrixXd Vc;  // block diagonal, reference completion from pushed-forward completion
  Eigen::MatrixXd E;   // Boolean extraction
  Eigen::MatrixXd V;   // E * Vc * D
  Eigen::MatrixXd M;   // V^T
};

struct TransformOptions {
  /// Checks n_i(psi_j) = delta_ij on the cell and throws DualityFailure
  /// when the deviation exceeds 1e-9.
  bool verify_duality = false;
};

TransformMatrices transform(const ReferenceElement& ref, const CellGeometry& geom, TransformOptions options = {});

/// V written out entry by entry in closed form (vertex rows carry J^T, edge
/// rows carry +-beta and the B blocks). Must agree with E * Vc * D.
Eigen::MatrixXd closed_form_V(const ReferenceElement& ref, const CellGeometry& geom);

/// Matrix taking the reference derivative vector (orders <= max_order, in
/// derivative_index order) to the physical one for an affine map whose
/// inverse Jacobian is J_inv.
Eigen::MatrixXd derivative_chain(const Mat2& J_inv, int max_order);

/// Maps reference derivative tables (tabulated at reference points) to the
/// physical basis on the cell. Derivatives are chained through J^{-1}; the
/// map is affine so no curvature terms appear.
DerivativeTable push_forward(const DerivativeTable& reference_table, const TransformMatrices& tm,
                             const CellGeometry& geom);

/// Physical basis derivatives at physical points inside the cell.
/// Throws PointOutsideCell.
DerivativeTable physical_tabulate(const ReferenceElement& ref, const TransformMatrices& tm, const CellGeometry& geom,
                                  std::span<const Vec2> points, int max_order);

/// Value, gradient and Hessian of a function at a point.
struct Jet {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
};
using JetFunction = std::function<Jet(const Vec2&)>;

/// Applies the physical nodes of the cell to a function (edge moments by
/// 4-point Gauss-Legendre quadrature, not averaged).
Eigen::VectorXd apply_physical_nodes(const CellGeometry& geom, ElementKind kind, const JetFunction& f);

/// max_ij |n_i(psi_j) - delta_ij| for the physical basis of the cell.
double duality_error(const ReferenceElement& ref, const TransformMatrices& tm, const CellGeometry& geom);

}  // namespace wxreg
