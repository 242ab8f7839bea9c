#include "wxreg/wuxu_element.hpp"

#include "wxreg/errors.hpp"
#include "wxreg/quadrature.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace wxreg {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kDualityTolerance = 1e-9;
constexpr int kEdgePoints = 4;

// Local vertices of edge i, lower index first.
constexpr std::array<std::array<int, 2>, 3> kEdgeVertices = {{{1, 2}, {0, 2}, {0, 1}}};

Mat2 frame_matrix(const Vec2& n, const Vec2& t) {
  Mat2 G;
  G << n.x(), n.y(), t.x(), t.y();
  return G;
}

Mat3 gamma_matrix(const Vec2& n, const Vec2& t) {
  Mat3 g;
  g << n.x() * n.x(), 2.0 * n.x() * t.x(), t.x() * t.x(),
      n.x() * n.y(), n.x() * t.y() + n.y() * t.x(), t.x() * t.y(),
      n.y() * n.y(), 2.0 * n.y() * t.y(), t.y() * t.y();
  return g;
}

// Hessian map (fxx, fxy, fyy) <- (f_uu, f_uv, f_vv) for the linear change of
// variables with u-derivative d/du = m(0,0) d/dx + m(1,0) d/dy, etc.
Mat3 hessian_map(const Mat2& m) {
  const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  Mat3 t;
  t << a * a, 2.0 * a * c, c * c,
      b * a, b * c + a * d, c * d,
      b * b, 2.0 * b * d, d * d;
  return t;
}

EdgeFrame make_frame(const std::array<Vec2, 3>& v, int edge) {
  EdgeFrame f;
  f.from = kEdgeVertices[edge][0];
  f.to = kEdgeVertices[edge][1];
  const Vec2 d = v[f.to] - v[f.from];
  f.length = d.norm();
  f.tangent = d / f.length;
  f.normal = Vec2(f.tangent.y(), -f.tangent.x());
  f.G = frame_matrix(f.normal, f.tangent);
  f.Gamma = gamma_matrix(f.normal, f.tangent);
  f.Gamma_inv = f.Gamma.inverse();
  return f;
}

std::vector<NodeDescriptor> make_nodes(ElementKind kind) {
  using T = NodeDescriptor::Type;
  std::vector<NodeDescriptor> nodes;
  for (int v = 0; v < 3; ++v) {
    nodes.push_back({T::point_value, v});
    nodes.push_back({T::derivative_x, v});
    nodes.push_back({T::derivative_y, v});
  }
  if (kind == ElementKind::robust)
    for (int e = 0; e < 3; ++e) nodes.push_back({T::normal_moment, e});
  for (int e = 0; e < 3; ++e) nodes.push_back({T::second_normal_moment, e});
  return nodes;
}

std::vector<Polynomial2> make_spanning_set(ElementKind kind) {
  std::vector<Polynomial2> s;
  for (int k = 0; k <= 3; ++k)
    for (int py = 0; py <= k; ++py) s.push_back(Polynomial2::monomial(k - py, py));
  const Polynomial2 x = Polynomial2::monomial(1, 0);
  const Polynomial2 y = Polynomial2::monomial(0, 1);
  const Polynomial2 bubble = Polynomial2::monomial(1, 1) * (Polynomial2::constant(1.0) + x * -1.0 + y * -1.0);
  s.push_back(bubble * x);
  s.push_back(bubble * y);
  if (kind == ElementKind::robust) {
    const Polynomial2 b2 = bubble * bubble;
    s.push_back(b2);
    s.push_back(b2 * x);
    s.push_back(b2 * y);
  }
  return s;
}

// Points at which the physical nodes need jets: the three vertices, then
// kEdgePoints Gauss points per edge.
std::vector<Vec2> node_points(const std::array<Vec2, 3>& v) {
  const LineRule rule = gauss_legendre(kEdgePoints);
  std::vector<Vec2> pts(v.begin(), v.end());
  for (int e = 0; e < 3; ++e) {
    const Vec2& a = v[kEdgeVertices[e][0]];
    const Vec2& b = v[kEdgeVertices[e][1]];
    for (double s : rule.points) pts.push_back(a + s * (b - a));
  }
  return pts;
}

// Node values from jets at node_points(). Edge moments are multiplied by
// `edge_scale[e]` (|e| for integrals, 1 for averages).
Eigen::VectorXd nodes_from_jets(ElementKind kind, const std::array<EdgeFrame, 3>& edges,
                                const std::array<double, 3>& edge_scale, std::span<const Jet> jets) {
  const LineRule rule = gauss_legendre(kEdgePoints);
  Eigen::VectorXd out(num_dofs(kind));
  int k = 0;
  for (int v = 0; v < 3; ++v) {
    out[k++] = jets[v].value;
    out[k++] = jets[v].gradient.x();
    out[k++] = jets[v].gradient.y();
  }
  if (kind == ElementKind::robust) {
    for (int e = 0; e < 3; ++e) {
      double acc = 0.0;
      for (int q = 0; q < kEdgePoints; ++q) acc += rule.weights[q] * edges[e].normal.dot(jets[3 + e * kEdgePoints + q].gradient);
      out[k++] = edge_scale[e] * acc;
    }
  }
  for (int e = 0; e < 3; ++e) {
    double acc = 0.0;
    const Vec2& n = edges[e].normal;
    for (int q = 0; q < kEdgePoints; ++q) acc += rule.weights[q] * n.dot(jets[3 + e * kEdgePoints + q].hessian * n);
    out[k++] = edge_scale[e] * acc;
  }
  return out;
}

Jet jet_of(const DerivativeTable& t, int point, int function) {
  Jet j;
  j.value = t(point, function, 0);
  j.gradient = Vec2(t(point, function, derivative_index(1, 0)), t(point, function, derivative_index(0, 1)));
  const double fxy = t(point, function, derivative_index(1, 1));
  j.hessian << t(point, function, derivative_index(2, 0)), fxy, fxy, t(point, function, derivative_index(0, 2));
  return j;
}

}  // namespace

double ReferenceElement::apply_node(int node, const Polynomial2& p) const {
  const NodeDescriptor& d = nodes_.at(node);
  switch (d.type) {
    case NodeDescriptor::Type::point_value:
      return p(vertices_[d.entity]);
    case NodeDescriptor::Type::derivative_x:
      return p.derivative(1, 0)(vertices_[d.entity]);
    case NodeDescriptor::Type::derivative_y:
      return p.derivative(0, 1)(vertices_[d.entity]);
    case NodeDescriptor::Type::normal_moment:
    case NodeDescriptor::Type::second_normal_moment: {
      const EdgeFrame& e = edges_[d.entity];
      const LineRule rule = gauss_legendre(kEdgePoints);
      const Vec2& n = e.normal;
      const Polynomial2 px = p.derivative(1, 0), py = p.derivative(0, 1);
      const Polynomial2 pxx = p.derivative(2, 0), pxy = p.derivative(1, 1), pyy = p.derivative(0, 2);
      double acc = 0.0;
      for (int q = 0; q < kEdgePoints; ++q) {
        const Vec2 x = vertices_[e.from] + rule.points[q] * (vertices_[e.to] - vertices_[e.from]);
        if (d.type == NodeDescriptor::Type::normal_moment)
          acc += rule.weights[q] * (n.x() * px(x) + n.y() * py(x));
        else
          acc += rule.weights[q] * (n.x() * n.x() * pxx(x) + 2.0 * n.x() * n.y() * pxy(x) + n.y() * n.y() * pyy(x));
      }
      return acc;
    }
  }
  return 0.0;
}

ReferenceElement build_reference_element(ElementKind kind) {
  ReferenceElement ref;
  ref.kind_ = kind;
  ref.vertices_ = {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  for (int e = 0; e < 3; ++e) ref.edges_[e] = make_frame(ref.vertices_, e);
  ref.nodes_ = make_nodes(kind);
  ref.spanning_ = make_spanning_set(kind);

  const int n = static_cast<int>(ref.spanning_.size());
  Eigen::MatrixXd P(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) P(i, k) = ref.apply_node(i, ref.spanning_[k]);

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(P);
  const auto& sv = svd.singularValues();
  ref.condition_ = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  if (!(ref.condition_ <= kMaxCondition))
    throw IllConditioned("reference Vandermonde condition number " + std::to_string(ref.condition_));

  ref.coefficients_ = P.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
  ref.basis_.assign(n, Polynomial2());
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) ref.basis_[j] += ref.spanning_[k] * ref.coefficients_(k, j);
  return ref;
}

DerivativeTable tabulate(const ReferenceElement& ref, std::span<const Vec2> points, int max_order) {
  if (max_order < 0 || max_order > 3) throw PreconditionViolation("derivative order must be in [0, 3]");
  const int nb = ref.num_dofs();
  DerivativeTable table(static_cast<int>(points.size()), nb, max_order);
  for (int j = 0; j < nb; ++j) {
    for (int k = 0; k <= max_order; ++k)
      for (int dy = 0; dy <= k; ++dy) {
        const int d = derivative_index(k - dy, dy);
        const Polynomial2 p = ref.basis()[j].derivative(k - dy, dy);
        for (int q = 0; q < static_cast<int>(points.size()); ++q) table(q, j, d) = p(points[q]);
      }
  }
  return table;
}

CellGeometry cell_geometry(const std::array<Vec2, 3>& vertices, const ReferenceElement& ref) {
  CellGeometry g;
  g.vertices = vertices;
  g.J.col(0) = vertices[1] - vertices[0];
  g.J.col(1) = vertices[2] - vertices[0];
  g.det_J = g.J.determinant();
  const double scale = std::max(g.J.col(0).squaredNorm(), g.J.col(1).squaredNorm());
  if (!(std::abs(g.det_J) > 1e-12 * scale)) throw SingularCell("degenerate triangle (det J = " + std::to_string(g.det_J) + ")");
  g.J_inv = g.J.inverse();
  g.Theta = hessian_map(g.J_inv);
  g.Theta_inv = hessian_map(g.J);

  for (int e = 0; e < 3; ++e) {
    EdgeGeometry& eg = g.edges[e];
    static_cast<EdgeFrame&>(eg) = make_frame(vertices, e);
    const EdgeFrame& re = ref.edges()[e];
    eg.B1 = re.G * g.J.transpose() * eg.G.transpose() / eg.length;
    eg.B2 = re.Gamma_inv * g.Theta_inv * eg.Gamma / eg.length;
    eg.beta_x = eg.normal.x() * eg.B2(0, 1) + eg.tangent.x() * eg.B2(0, 2);
    eg.beta_y = eg.normal.y() * eg.B2(0, 1) + eg.tangent.y() * eg.B2(0, 2);
  }
  return g;
}

CellGeometry cell_geometry(const Mesh& mesh, int cell, const ReferenceElement& ref) {
  const auto& c = mesh.cell(cell);
  try {
    return cell_geometry({mesh.vertex(c[0]), mesh.vertex(c[1]), mesh.vertex(c[2])}, ref);
  } catch (const SingularCell& e) {
    throw SingularCell("cell " + std::to_string(cell) + ": " + e.what());
  }
}

TransformMatrices transform(const ReferenceElement& ref, const CellGeometry& geom, TransformOptions options) {
  const bool robust = ref.kind() == ElementKind::robust;
  const int nd = ref.num_dofs();
  const int ncomp = robust ? 24 : 18;
  const int m1_start = 9;                      // robust only: (n, t) per edge
  const int m2_start = robust ? 15 : 9;        // (nn, nt, tt) per edge
  const int nn_dof = robust ? 12 : 9;          // element index of mu_nn(e1)

  TransformMatrices tm;
  tm.D = Eigen::MatrixXd::Zero(ncomp, nd);
  tm.Vc = Eigen::MatrixXd::Zero(ncomp, ncomp);
  tm.E = Eigen::MatrixXd::Zero(nd, ncomp);

  for (int v = 0; v < 3; ++v) {
    for (int k = 0; k < 3; ++k) tm.D(3 * v + k, 3 * v + k) = 1.0;
    tm.Vc(3 * v, 3 * v) = 1.0;
    tm.Vc.block<2, 2>(3 * v + 1, 3 * v + 1) = geom.J.transpose();
  }
  for (int e = 0; e < 3; ++e) {
    const EdgeGeometry& eg = geom.edges[e];
    const int a = eg.from, b = eg.to;
    if (robust) {
      const int r = m1_start + 2 * e;
      tm.D(r, 9 + e) = 1.0;
      tm.D(r + 1, 3 * a) = -1.0;
      tm.D(r + 1, 3 * b) = 1.0;
      tm.Vc.block<2, 2>(r, r) = eg.B1;
    }
    const int r = m2_start + 3 * e;
    tm.D(r, nn_dof + e) = 1.0;
    for (int c = 0; c < 2; ++c) {
      tm.D(r + 1, 3 * a + 1 + c) = -eg.normal[c];
      tm.D(r + 1, 3 * b + 1 + c) = eg.normal[c];
      tm.D(r + 2, 3 * a + 1 + c) = -eg.tangent[c];
      tm.D(r + 2, 3 * b + 1 + c) = eg.tangent[c];
    }
    tm.Vc.block<3, 3>(r, r) = eg.B2;
  }
  for (int k = 0; k < 9; ++k) tm.E(k, k) = 1.0;
  for (int e = 0; e < 3; ++e) {
    if (robust) tm.E(9 + e, m1_start + 2 * e) = 1.0;
    tm.E(nn_dof + e, m2_start + 3 * e) = 1.0;
  }
  tm.V = tm.E * tm.Vc * tm.D;
  tm.M = tm.V.transpose();

  if (options.verify_duality) {
    const double err = duality_error(ref, tm, geom);
    if (!(err <= kDualityTolerance)) throw DualityFailure("max |n_i(psi_j) - delta_ij| = " + std::to_string(err));
  }
  return tm;
}

Eigen::MatrixXd closed_form_V(const ReferenceElement& ref, const CellGeometry& geom) {
  const bool robust = ref.kind() == ElementKind::robust;
  const int nd = ref.num_dofs();
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(nd, nd);
  for (int v = 0; v < 3; ++v) {
    V(3 * v, 3 * v) = 1.0;
    V(3 * v + 1, 3 * v + 1) = geom.J(0, 0);  // dx/dxhat
    V(3 * v + 1, 3 * v + 2) = geom.J(1, 0);  // dy/dxhat
    V(3 * v + 2, 3 * v + 1) = geom.J(0, 1);  // dx/dyhat
    V(3 * v + 2, 3 * v + 2) = geom.J(1, 1);  // dy/dyhat
  }
  const int nn_row = robust ? 12 : 9;
  for (int e = 0; e < 3; ++e) {
    const EdgeGeometry& eg = geom.edges[e];
    if (robust) {
      const int r = 9 + e;
      V(r, 3 * eg.from) = -eg.B1(0, 1);
      V(r, 3 * eg.to) = eg.B1(0, 1);
      V(r, r) = eg.B1(0, 0);
    }
    const int r = nn_row + e;
    V(r, 3 * eg.from + 1) = -eg.beta_x;
    V(r, 3 * eg.from + 2) = -eg.beta_y;
    V(r, 3 * eg.to + 1) = eg.beta_x;
    V(r, 3 * eg.to + 2) = eg.beta_y;
    V(r, r) = eg.B2(0, 0);
  }
  return V;
}

Eigen::MatrixXd derivative_chain(const Mat2& B, int max_order) {
  const int nd = num_derivatives(max_order);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nd, nd);
  for (int k = 0; k <= max_order; ++k) {
    for (int b = 0; b <= k; ++b) {
      const int a = k - b;
      // Expand (B00 X + B10 Y)^a (B01 X + B11 Y)^b; poly[q] is the Y^q coefficient.
      std::vector<double> poly{1.0};
      auto multiply = [&poly](double cx, double cy) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t q = 0; q < poly.size(); ++q) {
          next[q] += cx * poly[q];
          next[q + 1] += cy * poly[q];
        }
        poly.swap(next);
      };
      for (int m = 0; m < a; ++m) multiply(B(0, 0), B(1, 0));
      for (int m = 0; m < b; ++m) multiply(B(0, 1), B(1, 1));
      for (int q = 0; q <= k; ++q) T(derivative_index(a, b), derivative_index(k - q, q)) = poly[q];
    }
  }
  return T;
}

DerivativeTable push_forward(const DerivativeTable& reference_table, const TransformMatrices& tm,
                             const CellGeometry& geom) {
  const int np = reference_table.num_points();
  const int nb = reference_table.num_functions();
  const int order = reference_table.max_order();
  const int nd = num_derivatives(order);
  if (tm.M.rows() != nb) throw ShapeMismatch("transform and table disagree on the number of basis functions");
  const Eigen::MatrixXd T = derivative_chain(geom.J_inv, order);

  DerivativeTable out(np, nb, order);
  Eigen::MatrixXd R(nd, nb);
  for (int p = 0; p < np; ++p) {
    for (int i = 0; i < nb; ++i)
      for (int d = 0; d < nd; ++d) R(d, i) = reference_table(p, i, d);
    const Eigen::MatrixXd P = T * R * tm.M.transpose();  // nd x nb
    for (int j = 0; j < nb; ++j)
      for (int d = 0; d < nd; ++d) out(p, j, d) = P(d, j);
  }
  return out;
}

DerivativeTable physical_tabulate(const ReferenceElement& ref, const TransformMatrices& tm, const CellGeometry& geom,
                                  std::span<const Vec2> points, int max_order) {
  constexpr double kSlack = 1e-10;
  std::vector<Vec2> ref_points;
  ref_points.reserve(points.size());
  for (const Vec2& x : points) {
    const Vec2 r = geom.to_reference(x);
    if (r.x() < -kSlack || r.y() < -kSlack || r.x() + r.y() > 1.0 + kSlack)
      throw PointOutsideCell("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) + ") is outside the cell");
    ref_points.push_back(r);
  }
  return push_forward(tabulate(ref, ref_points, max_order), tm, geom);
}

Eigen::VectorXd apply_physical_nodes(const CellGeometry& geom, ElementKind kind, const JetFunction& f) {
  const std::vector<Vec2> pts = node_points(geom.vertices);
  std::vector<Jet> jets;
  jets.reserve(pts.size());
  for (const Vec2& x : pts) jets.push_back(f(x));
  std::array<EdgeFrame, 3> frames;
  std::array<double, 3> scale{};
  for (int e = 0; e < 3; ++e) {
    frames[e] = geom.edges[e];
    scale[e] = geom.edges[e].length;
  }
  return nodes_from_jets(kind, frames, scale, jets);
}

double duality_error(const ReferenceElement& ref, const TransformMatrices& tm, const CellGeometry& geom) {
  const std::vector<Vec2> pts = node_points(geom.vertices);
  const DerivativeTable table = physical_tabulate(ref, tm, geom, pts, 2);
  std::array<EdgeFrame, 3> frames;
  std::array<double, 3> scale{};
  for (int e = 0; e < 3; ++e) {
    frames[e] = geom.edges[e];
    scale[e] = geom.edges[e].length;
  }
  const int nb = ref.num_dofs();
  double err = 0.0;
  std::vector<Jet> jets(pts.size());
  for (int j = 0; j < nb; ++j) {
    for (int p = 0; p < static_cast<int>(pts.size()); ++p) jets[p] = jet_of(table, p, j);
    const Eigen::VectorXd nodes = nodes_from_jets(ref.kind(), frames, scale, jets);
    for (int i = 0; i < nb; ++i) err = std::max(err, std::abs(nodes[i] - (i == j ? 1.0 : 0.0)));
  }
  return err;
}

}  // namespace wxreg
