#include "wxreg/errors.hpp"
#include "wxreg/mesh.hpp"
#include "wxreg/misfit_raster.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace wxreg;

namespace {

Polygon ngon(int n, double r = 1.0) {
  Polygon p;
  for (int k = 0; k < n; ++k)
    p.emplace_back(r * std::cos(2 * std::numbers::pi * k / n), r * std::sin(2 * std::numbers::pi * k / n));
  return p;
}

double mass(const RasterField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.spec.weight();
}

RasterField random_field(const RasterSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  RasterField f(spec);
  for (double& v : f.values) v = u(rng);
  return f;
}

}  // namespace

TEST_SUITE("misfit_raster") {
  TEST_CASE("48-gon indicator mass on the default grid") {
    const RasterSpec spec;
    const Polygon p = ngon(48);
    const RasterField f = rasterize_indicator(p, spec);
    // brute-force oracle: cell centres on the inner side of all 48 edges
    int inside = 0;
    for (int j = 0; j < spec.ny; ++j)
      for (int i = 0; i < spec.nx; ++i) {
        const Vec2 c = spec.cell_center(i, j);
        bool in = true;
        for (int k = 0; k < 48 && in; ++k) {
          const Vec2 a = p[k], b = p[(k + 1) % 48];
          in = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()) >= 0;
        }
        inside += in;
      }
    CHECK(mass(f) == doctest::Approx(inside * spec.weight()).epsilon(1e-14));
    const double exact = 0.5 * 48 * std::sin(2 * std::numbers::pi / 48);
    const double bound = 48 * 2 * std::sin(std::numbers::pi / 48) * std::hypot(spec.dx(), spec.dy());
    CHECK(std::abs(mass(f) - exact) < bound);
    MESSAGE("48-gon raster mass " << mass(f) << " (" << inside << " cells), exact area " << exact);
  }

  TEST_CASE("inside and outside cells, orientation independence") {
    const RasterSpec spec;
    const Polygon p = ngon(48);
    const RasterField f = rasterize_indicator(p, spec);
    CHECK(f.at(63, 63) == 1.0);  // centre (-0.078, -0.078)
    CHECK(f.at(64, 64) == 1.0);
    CHECK(f.at(96, 96) == 0.0);  // near (5, 5)
    Polygon rev(p.rbegin(), p.rend());
    CHECK(rasterize_indicator(rev, spec).values == f.values);
    CHECK(winding_number(p, Vec2(0, 0)) == 1);
    CHECK(winding_number(rev, Vec2(0, 0)) == -1);
    CHECK(winding_number(p, Vec2(3, 0)) == 0);
  }

  TEST_CASE("refinement changes the mass by less than perimeter times cell diagonal") {
    const Polygon p = ngon(48);
    RasterSpec coarse;
    coarse.nx = coarse.ny = 64;
    RasterSpec fine;
    const double diag = std::hypot(coarse.dx(), coarse.dy());
    const double perimeter = 48 * 2 * std::sin(std::numbers::pi / 48);
    CHECK(std::abs(mass(rasterize_indicator(p, coarse)) - mass(rasterize_indicator(p, fine))) < perimeter * diag);
  }

  TEST_CASE("smoothing a constant is the identity") {
    RasterSpec spec;
    spec.nx = spec.ny = 32;
    const RasterField c(spec, 2.5);
    const RasterField s = smooth(c, Smoother{});
    for (double v : s.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-8));
  }

  TEST_CASE("Neumann smoothing conserves mass") {
    const RasterField f = rasterize_indicator(ngon(48), RasterSpec{});
    const RasterField s = smooth(f, Smoother{});
    CHECK(std::abs(mass(s) - mass(f)) <= 1e-6 * mass(f));
  }

  TEST_CASE("impulse response is symmetric about its cell") {
    RasterSpec spec;
    spec.nx = spec.ny = 33;
    RasterField f(spec);
    f.at(16, 16) = 1.0;
    Smoother sm;
    sm.tolerance = 1e-13;
    const RasterField s = smooth(f, sm);
    double worst = 0.0;
    for (int j = 0; j < 33; ++j)
      for (int i = 0; i < 33; ++i) {
        worst = std::max(worst, std::abs(s.at(i, j) - s.at(32 - i, j)));
        worst = std::max(worst, std::abs(s.at(i, j) - s.at(i, 32 - j)));
        worst = std::max(worst, std::abs(s.at(i, j) - s.at(j, i)));
      }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("smoother is linear and self-adjoint") {
    RasterSpec spec;
    spec.nx = spec.ny = 48;
    const RasterField f = random_field(spec, 1), g = random_field(spec, 2);
    const Smoother sm;
    const RasterField sf = smooth(f, sm), sg = smooth(g, sm);
    RasterField comb(spec);
    for (std::size_t k = 0; k < comb.values.size(); ++k) comb.values[k] = 2.0 * f.values[k] - 0.5 * g.values[k];
    const RasterField sc = smooth(comb, sm);
    double worst = 0.0;
    for (std::size_t k = 0; k < comb.values.size(); ++k)
      worst = std::max(worst, std::abs(sc.values[k] - (2.0 * sf.values[k] - 0.5 * sg.values[k])));
    CHECK(worst < 1e-8);
    const double a = l2_inner(sf, g), b = l2_inner(f, sg);
    CHECK(std::abs(a - b) <= 1e-6 * std::abs(a));
  }

  TEST_CASE("inner product: positivity, box area, bitwise symmetry") {
    const RasterSpec spec;
    const RasterField one(spec, 1.0);
    CHECK(l2_inner(one, one) == doctest::Approx(400.0).epsilon(1e-12));
    const RasterField z(spec);
    CHECK(l2_inner(z, z) == 0.0);
    const RasterField f = random_field(spec, 3), g = random_field(spec, 4);
    CHECK(l2_inner(f, f) > 0.0);
    CHECK(l2_inner(f, g) == l2_inner(g, f));
    RasterSpec other = spec;
    other.nx = 64;
    CHECK_THROWS_AS(l2_inner(f, RasterField(other)), ShapeMismatch);
  }

  TEST_CASE("RasterSpec validation and from_mesh") {
    RasterSpec bad;
    bad.nx = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    Smoother s;
    s.kappa = -1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    MeshGenConfig cfg;
    cfg.half_width = 6;
    const RasterSpec spec = RasterSpec::from_mesh(generate_template_mesh(cfg).mesh, 40, 50);
    CHECK(spec.lo == Vec2(-6, -6));
    CHECK(spec.hi == Vec2(6, 6));
    CHECK(spec.nx == 40);
    CHECK(spec.ny == 50);
  }

  TEST_CASE("smoother reports non-convergence") {
    const RasterField f = rasterize_indicator(ngon(48), RasterSpec{});
    Smoother s;
    s.max_iterations = 2;
    CHECK_THROWS_AS(smooth(f, s), NotConverged);
  }
}
