#include "delaunay.hpp"

#include "wxreg/errors.hpp"

#include <cmath>
#include <string>

namespace wxreg::detail {

namespace {

struct Triangle {
  std::array<int, 3> v;
  std::array<int, 3> nbr;  // neighbour across the edge opposite v[i], -1 on the hull
  bool alive = true;
};

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
}

// Positive when d lies strictly inside the circumcircle of the ccw triangle abc.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace

std::vector<std::array<int, 3>> delaunay_in_box(std::span<const Vec2> points) {
  const int np = static_cast<int>(points.size());
  if (np < 4) throw GenerationFailure("need the four box corners");

  double scale = 0.0;
  for (const Vec2& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double orient_eps = 1e-13 * scale * scale;

  std::vector<Triangle> tris;
  tris.push_back({{0, 1, 2}, {-1, 1, -1}});
  tris.push_back({{0, 2, 3}, {-1, -1, 0}});
  if (orient(points[0], points[1], points[2]) <= 0 || orient(points[0], points[2], points[3]) <= 0)
    throw GenerationFailure("box corners must be given counterclockwise");

  std::vector<int> cavity;
  std::vector<char> in_cavity;
  std::vector<int> start_of(np, -1), end_of(np, -1);

  for (int ip = 4; ip < np; ++ip) {
    const Vec2& p = points[ip];

    int seed = -1;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      const auto& v = tris[t].v;
      if (orient(points[v[0]], points[v[1]], p) >= -orient_eps && orient(points[v[1]], points[v[2]], p) >= -orient_eps &&
          orient(points[v[2]], points[v[0]], p) >= -orient_eps) {
        seed = t;
        break;
      }
    }
    if (seed < 0) throw GenerationFailure("point " + std::to_string(ip) + " lies outside the box");

    in_cavity.assign(tris.size(), 0);
    cavity.assign(1, seed);
    in_cavity[seed] = 1;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const Triangle& t = tris[cavity[k]];
      for (int i = 0; i < 3; ++i) {
        const int n = t.nbr[i];
        if (n < 0 || in_cavity[n]) continue;
        const auto& w = tris[n].v;
        if (incircle(points[w[0]], points[w[1]], points[w[2]], p) > 0.0) {
          in_cavity[n] = 1;
          cavity.push_back(n);
        }
      }
    }

    struct BoundaryEdge {
      int a, b, outer, outer_slot;
    };
    std::vector<BoundaryEdge> boundary;
    for (int ct : cavity) {
      const Triangle& t = tris[ct];
      for (int i = 0; i < 3; ++i) {
        const int n = t.nbr[i];
        if (n >= 0 && in_cavity[n]) continue;
        int slot = -1;
        if (n >= 0)
          for (int j = 0; j < 3; ++j)
            if (tris[n].nbr[j] == ct) slot = j;
        boundary.push_back({t.v[(i + 1) % 3], t.v[(i + 2) % 3], n, slot});
      }
    }
    for (int ct : cavity) tris[ct].alive = false;

    std::vector<int> created;
    for (const auto& be : boundary) {
      const double o = orient(points[be.a], points[be.b], p);
      if (std::abs(o) <= orient_eps) {
        if (be.outer >= 0) throw GenerationFailure("point " + std::to_string(ip) + " is collinear with an interior edge");
        continue;  // p splits this hull edge
      }
      if (o < 0) throw GenerationFailure("cavity of point " + std::to_string(ip) + " is not star-shaped");
      const int id = static_cast<int>(tris.size());
      tris.push_back({{be.a, be.b, ip}, {-1, -1, be.outer}});
      if (be.outer >= 0) tris[be.outer].nbr[be.outer_slot] = id;
      start_of[be.a] = id;
      end_of[be.b] = id;
      created.push_back(id);
    }
    for (int id : created) {
      Triangle& t = tris[id];
      // Opposite a: edge (b, p), shared with the triangle starting at b.
      t.nbr[0] = start_of[t.v[1]];
      // Opposite b: edge (p, a), shared with the triangle ending at a.
      t.nbr[1] = end_of[t.v[0]];
    }
    for (int id : created) {
      start_of[tris[id].v[0]] = -1;
      end_of[tris[id].v[1]] = -1;
    }
  }

  std::vector<std::array<int, 3>> out;
  for (const Triangle& t : tris)
    if (t.alive) out.push_back(t.v);
  return out;
}

}  // namespace wxreg::detail
