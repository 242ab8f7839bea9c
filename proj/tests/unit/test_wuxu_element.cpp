#include "support.hpp"

#include "wxreg/errors.hpp"
#include "wxreg/quadrature.hpp"
#include "wxreg/wuxu_element.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace wxreg;
using test::jet_function;
using test::random_cubic;
using test::random_triangle;

namespace {

const ReferenceElement& ref(ElementKind kind) {
  static const ReferenceElement s = build_reference_element(ElementKind::standard);
  static const ReferenceElement r = build_reference_element(ElementKind::robust);
  return kind == ElementKind::standard ? s : r;
}

// Finite element interpolant of f on the cell: sum_j n_j(f) psi_j, evaluated
// (orders <= max_order) at the points.
Eigen::MatrixXd interpolate_on_cell(ElementKind kind, const std::array<Vec2, 3>& v, const Polynomial2& f,
                                    const std::vector<Vec2>& points, int max_order) {
  const CellGeometry g = cell_geometry(v, ref(kind));
  const TransformMatrices tm = transform(ref(kind), g);
  const Eigen::VectorXd c = apply_physical_nodes(g, kind, jet_function(f));
  const DerivativeTable t = physical_tabulate(ref(kind), tm, g, points, max_order);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(points.size(), num_derivatives(max_order));
  for (int p = 0; p < t.num_points(); ++p)
    for (int j = 0; j < t.num_functions(); ++j)
      for (int d = 0; d < num_derivatives(max_order); ++d) out(p, d) += c[j] * t(p, j, d);
  return out;
}

double derivative_of(const Polynomial2& f, int d, const Vec2& x) {
  int order = 0;
  while (num_derivatives(order) <= d) ++order;
  const int dy = d - num_derivatives(order - 1);
  return f.derivative(order - dy, dy)(x);
}

const std::array<Vec2, 3> kRandomCell{Vec2(0.1, 0.2), Vec2(1.3, 0.15), Vec2(0.4, 1.1)};
const std::array<Vec2, 3> kReferenceCell{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};

}  // namespace

TEST_SUITE("wuxu_element") {
  TEST_CASE("dimensions of W and W_r") {
    CHECK(ref(ElementKind::standard).num_dofs() == 12);
    CHECK(ref(ElementKind::robust).num_dofs() == 15);
    CHECK(ref(ElementKind::standard).spanning_set().size() == 12);
    CHECK(ref(ElementKind::robust).spanning_set().size() == 15);
  }

  TEST_CASE("reference duality to 1e-10") {
    for (auto kind : {ElementKind::standard, ElementKind::robust}) {
      const ReferenceElement& r = ref(kind);
      double worst = 0.0;
      for (int i = 0; i < r.num_dofs(); ++i)
        for (int j = 0; j < r.num_dofs(); ++j)
          worst = std::max(worst, std::abs(r.apply_node(i, r.basis()[j]) - (i == j ? 1.0 : 0.0)));
      CHECK(worst < 1e-10);
      CHECK(r.vandermonde_condition() < 1e12);
    }
  }

  TEST_CASE("fourth node against its own and an edge-moment basis function") {
    const ReferenceElement& r = ref(ElementKind::standard);
    CHECK(r.apply_node(3, r.basis()[3]) == doctest::Approx(1.0));
    CHECK(std::abs(r.apply_node(3, r.basis()[9])) < 1e-12);
    CHECK(r.nodes()[3].type == NodeDescriptor::Type::point_value);
    CHECK(r.nodes()[3].entity == 1);
    CHECK(r.nodes()[9].type == NodeDescriptor::Type::second_normal_moment);
  }

  TEST_CASE("reference edge moments are averaged") {
    // second normal derivative of x^2/2 along edge 0 (normal (1,1)/sqrt2) is 1/2
    const ReferenceElement& r = ref(ElementKind::standard);
    const Polynomial2 f = Polynomial2::monomial(2, 0, 0.5);
    CHECK(r.apply_node(9, f) == doctest::Approx(0.5));
    CHECK(r.apply_node(10, f) == doctest::Approx(1.0));
  }

  TEST_CASE("edge frames: tangents low to high, n = (t_y, -t_x), orthogonal G") {
    const ReferenceElement& r = ref(ElementKind::standard);
    const std::array<std::array<int, 2>, 3> pairs{{{1, 2}, {0, 2}, {0, 1}}};
    for (int i = 0; i < 3; ++i) {
      const EdgeFrame& e = r.edges()[i];
      CHECK(e.from == pairs[i][0]);
      CHECK(e.to == pairs[i][1]);
      CHECK(e.normal.x() == doctest::Approx(e.tangent.y()));
      CHECK(e.normal.y() == doctest::Approx(-e.tangent.x()));
      CHECK((e.G * e.G.transpose() - Mat2::Identity()).norm() < 1e-14);
      CHECK((e.Gamma * e.Gamma_inv - Mat3::Identity()).norm() < 1e-14);
    }
  }

  TEST_CASE("interpolating 1 gives a partition of unity") {
    const ReferenceElement& r = ref(ElementKind::standard);
    std::vector<double> n1(r.num_dofs());
    for (int j = 0; j < r.num_dofs(); ++j) n1[j] = r.apply_node(j, Polynomial2::constant(1.0));
    std::mt19937_64 rng(3);
    std::vector<Vec2> pts;
    for (int k = 0; k < 10; ++k) pts.push_back(test::random_interior_point(rng, kReferenceCell));
    const DerivativeTable t = tabulate(r, pts, 1);
    for (int p = 0; p < t.num_points(); ++p) {
      double s = 0.0, sx = 0.0;
      for (int j = 0; j < t.num_functions(); ++j) {
        s += n1[j] * t(p, j, 0);
        sx += n1[j] * t(p, j, 1);
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(sx) < 1e-11);
    }
  }

  TEST_CASE("reference interpolation of x^3 and constant third derivatives of cubics") {
    const ReferenceElement& r = ref(ElementKind::standard);
    std::mt19937_64 rng(4);
    const Polynomial2 f = Polynomial2::monomial(3, 0);
    const Polynomial2 g = random_cubic(rng);
    std::vector<Vec2> pts;
    for (int k = 0; k < 10; ++k) pts.push_back(test::random_interior_point(rng, kReferenceCell));
    const DerivativeTable t = tabulate(r, pts, 3);
    for (int p = 0; p < t.num_points(); ++p) {
      double s = 0.0;
      std::array<double, 4> third{};
      for (int j = 0; j < r.num_dofs(); ++j) {
        s += r.apply_node(j, f) * t(p, j, 0);
        for (int d = 0; d < 4; ++d) third[d] += r.apply_node(j, g) * t(p, j, 6 + d);
      }
      CHECK(s == doctest::Approx(f(pts[p])).epsilon(1e-10));
      for (int d = 0; d < 4; ++d) CHECK(third[d] == doctest::Approx(g.derivative(3 - d, d)(0, 0)).epsilon(1e-9));
    }
  }

  TEST_CASE("geometry of the reference cell and of a scaled cell") {
    const CellGeometry g = cell_geometry(kReferenceCell, ref(ElementKind::standard));
    CHECK((g.J - Mat2::Identity()).norm() < 1e-15);
    for (int i = 0; i < 3; ++i)
      CHECK((g.edges[i].B2 - Mat3::Identity() / g.edges[i].length).norm() < 1e-14);

    const double s = 2.5;
    std::array<Vec2, 3> scaled = kReferenceCell;
    for (auto& p : scaled) p *= s;
    const CellGeometry gs = cell_geometry(scaled, ref(ElementKind::standard));
    // Theta maps reference Hessians to physical ones: factor 1/s^2; its inverse s^2.
    CHECK((gs.Theta - Mat3::Identity() / (s * s)).norm() < 1e-14);
    CHECK((gs.Theta_inv - Mat3::Identity() * (s * s)).norm() < 1e-12);
    for (int i = 0; i < 3; ++i) CHECK(gs.edges[i].length == doctest::Approx(s * g.edges[i].length));
  }

  TEST_CASE("random cell geometry identities") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
      const CellGeometry g = cell_geometry(random_triangle(rng), ref(ElementKind::robust));
      CHECK((g.J * g.J_inv - Mat2::Identity()).norm() < 1e-12);
      CHECK((g.Theta * g.Theta_inv - Mat3::Identity()).norm() < 1e-12);
      for (const auto& e : g.edges) {
        CHECK((e.G * e.G.transpose() - Mat2::Identity()).norm() < 1e-12);
        CHECK((e.Gamma * e.Gamma_inv - Mat3::Identity()).norm() < 1e-12);
      }
    }
  }

  TEST_CASE("degenerate cell raises SingularCell") {
    CHECK_THROWS_AS(cell_geometry({Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)}, ref(ElementKind::standard)), SingularCell);
  }

  TEST_CASE("V on the reference cell: identity on vertices, 1/|e| on edge moments") {
    for (auto kind : {ElementKind::standard, ElementKind::robust}) {
      const CellGeometry g = cell_geometry(kReferenceCell, ref(kind));
      const TransformMatrices tm = transform(ref(kind), g);
      Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(num_dofs(kind), num_dofs(kind));
      for (int i = 9; i < num_dofs(kind); ++i) expected(i, i) = 1.0 / g.edges[(i - 9) % 3].length;
      CHECK((tm.V - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("E selects, point-value rows of V are unit vectors, closed form agrees") {
    for (auto kind : {ElementKind::standard, ElementKind::robust}) {
      const CellGeometry g = cell_geometry(kRandomCell, ref(kind));
      const TransformMatrices tm = transform(ref(kind), g);
      for (int r = 0; r < tm.E.rows(); ++r) {
        CHECK(tm.E.row(r).sum() == 1.0);
        CHECK(tm.E.row(r).cwiseAbs().maxCoeff() == 1.0);
      }
      for (int r : {0, 3, 6}) {
        CHECK(tm.V(r, r) == 1.0);
        CHECK(tm.V.row(r).cwiseAbs().sum() == 1.0);
      }
      // gradient rows carry J^T
      CHECK((tm.V.block<2, 2>(1, 1) - g.J.transpose()).norm() < 1e-14);
      CHECK((tm.M - tm.V.transpose()).norm() == 0.0);
      CHECK((closed_form_V(ref(kind), g) - tm.V).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("duality on the fixed random cell") {
    for (auto kind : {ElementKind::standard, ElementKind::robust}) {
      const CellGeometry g = cell_geometry(kRandomCell, ref(kind));
      const TransformMatrices tm = transform(ref(kind), g, {.verify_duality = true});
      CHECK(duality_error(ref(kind), tm, g) < 1e-9);
    }
  }

  TEST_CASE("property: duality on 100 random cells, both elements") {
    std::mt19937_64 rng(11);
    for (auto kind : {ElementKind::standard, ElementKind::robust}) {
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        const CellGeometry g = cell_geometry(random_triangle(rng), ref(kind));
        worst = std::max(worst, duality_error(ref(kind), transform(ref(kind), g), g));
      }
      CHECK(worst < 1e-9);
    }
  }

  TEST_CASE("physical basis at the vertices") {
    const auto kind = ElementKind::standard;
    const CellGeometry g = cell_geometry(kRandomCell, ref(kind));
    const TransformMatrices tm = transform(ref(kind), g);
    const std::vector<Vec2> pts(kRandomCell.begin(), kRandomCell.end());
    const DerivativeTable t = physical_tabulate(ref(kind), tm, g, pts, 1);
    for (int v = 0; v < 3; ++v)
      for (int j = 0; j < 12; ++j) {
        CHECK(t(v, j, 0) == doctest::Approx(j == 3 * v ? 1.0 : 0.0).epsilon(1e-12));
        CHECK(t(v, j, 1) == doctest::Approx(j == 3 * v + 1 ? 1.0 : 0.0).epsilon(1e-12));
        CHECK(t(v, j, 2) == doctest::Approx(j == 3 * v + 2 ? 1.0 : 0.0).epsilon(1e-12));
      }
  }

  TEST_CASE("points outside the cell are rejected") {
    const auto kind = ElementKind::standard;
    const CellGeometry g = cell_geometry(kRandomCell, ref(kind));
    const TransformMatrices tm = transform(ref(kind), g);
    const std::vector<Vec2> pts{Vec2(5, 5)};
    CHECK_THROWS_AS(physical_tabulate(ref(kind), tm, g, pts, 0), PointOutsideCell);
  }

  TEST_CASE("x^2 y reproduced with its gradient on a random cell") {
    std::mt19937_64 rng(12);
    const auto v = random_triangle(rng);
    const Polynomial2 f = Polynomial2::monomial(2, 1);
    std::vector<Vec2> pts;
    for (int k = 0; k < 8; ++k) pts.push_back(test::random_interior_point(rng, v));
    const Eigen::MatrixXd r = interpolate_on_cell(ElementKind::standard, v, f, pts, 1);
    for (std::size_t p = 0; p < pts.size(); ++p)
      for (int d = 0; d < 3; ++d) CHECK(std::abs(r(p, d) - derivative_of(f, d, pts[p])) < 1e-9);
  }

  TEST_CASE("property: cubic reproduction through derivatives of order 3") {
    std::mt19937_64 rng(13);
    for (auto kind : {ElementKind::standard, ElementKind::robust}) {
      double worst = 0.0;
      for (int k = 0; k < 20; ++k) {
        const auto v = random_triangle(rng);
        const double h = std::max({(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()});
        const Polynomial2 f = random_cubic(rng);
        std::vector<Vec2> pts;
        for (int q = 0; q < 5; ++q) pts.push_back(test::random_interior_point(rng, v));
        const Eigen::MatrixXd r = interpolate_on_cell(kind, v, f, pts, 3);
        const double size = 1.0 + std::max({std::abs(f(v[0])), std::abs(f(v[1])), std::abs(f(v[2]))});
        // order-k derivatives carry length^-k; errors are measured in cell units relative to the data size
        for (std::size_t p = 0; p < pts.size(); ++p)
          for (int d = 0; d < num_derivatives(3); ++d) {
            const int order = d == 0 ? 0 : d < 3 ? 1 : d < 6 ? 2 : 3;
            worst = std::max(worst, std::abs(r(p, d) - derivative_of(f, d, pts[p])) * std::pow(h, order) / size);
          }
      }
      CHECK(worst < 1e-9);
    }
  }

  TEST_CASE("finite differences of the tables agree with higher orders") {
    const auto kind = ElementKind::standard;
    std::mt19937_64 rng(14);
    const auto v = random_triangle(rng);
    const CellGeometry g = cell_geometry(v, ref(kind));
    const TransformMatrices tm = transform(ref(kind), g);
    const Vec2 x = test::random_interior_point(rng, v);
    const double h = 1e-5 * g.edges[0].length;
    const std::vector<Vec2> pts{x, x + Vec2(h, 0), x - Vec2(h, 0), x + Vec2(0, h), x - Vec2(0, h)};
    const DerivativeTable t = physical_tabulate(ref(kind), tm, g, pts, 3);
    double worst = 0.0, scale = 0.0;
    for (int j = 0; j < 12; ++j)
      for (int order = 0; order < 3; ++order)
        for (int dy = 0; dy <= order; ++dy) {
          const int d = derivative_index(order - dy, dy);
          const double fdx = (t(1, j, d) - t(2, j, d)) / (2 * h);
          const double fdy = (t(3, j, d) - t(4, j, d)) / (2 * h);
          worst = std::max(worst, std::abs(fdx - t(0, j, derivative_index(order - dy + 1, dy))));
          worst = std::max(worst, std::abs(fdy - t(0, j, derivative_index(order - dy, dy + 1))));
          scale = std::max(scale, std::abs(t(0, j, derivative_index(order - dy + 1, dy))));
        }
    CHECK(worst < 1e-6 * std::max(1.0, scale));
  }

  TEST_CASE("second normal moment ignores the sign of the normal") {
    std::mt19937_64 rng(15);
    const auto v = random_triangle(rng);
    const Polynomial2 f = random_cubic(rng);
    // rotated vertex order changes which local vertices bound each edge
    const std::array<Vec2, 3> rot{v[1], v[2], v[0]};
    const Eigen::VectorXd a = apply_physical_nodes(cell_geometry(v, ref(ElementKind::standard)),
                                                   ElementKind::standard, jet_function(f));
    const Eigen::VectorXd b = apply_physical_nodes(cell_geometry(rot, ref(ElementKind::standard)),
                                                   ElementKind::standard, jet_function(f));
    // edge e_i of v is edge e_{i-1} of rot
    for (int i = 0; i < 3; ++i) CHECK(a[9 + i] == doctest::Approx(b[9 + (i + 2) % 3]).epsilon(1e-12));
  }
}
