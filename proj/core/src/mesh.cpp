#include "wxreg/mesh.hpp"

#include "wxreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace wxreg {

double polygon_area(const Polygon& polygon) {
  const std::size_t n = polygon.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % n];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

int MeshTopology::find_edge(int a, int b) const {
  if (a < 0 || a >= static_cast<int>(vertex_edges_.size())) return -1;
  for (const auto& [nbr, e] : vertex_edges_[a])
    if (nbr == b) return e;
  return -1;
}

Mesh Mesh::from_cells(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells) {
  const int nv = static_cast<int>(vertices.size());
  auto topo = std::make_shared<MeshTopology>();
  topo->vertex_edges_.resize(nv);
  std::vector<int> uses(nv, 0);

  double scale = 0.0;
  for (const Vec2& v : vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  scale = std::max(scale, 1.0);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = cells[c];
    for (int v : cell)
      if (v < 0 || v >= nv) throw GenerationFailure("cell " + std::to_string(c) + " references a missing vertex");
    if (cell[0] == cell[1] || cell[1] == cell[2] || cell[0] == cell[2])
      throw GenerationFailure("cell " + std::to_string(c) + " repeats a vertex");
    const double area = triangle_area(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
    if (std::abs(area) <= 1e-14 * scale * scale)
      throw GenerationFailure("cell " + std::to_string(c) + " is degenerate");
    if (area < 0) std::swap(cell[1], cell[2]);
    for (int v : cell) ++uses[v];
  }
  for (int v = 0; v < nv; ++v)
    if (uses[v] == 0) throw GenerationFailure("vertex " + std::to_string(v) + " belongs to no cell");

  topo->cells = std::move(cells);
  const int nc = static_cast<int>(topo->cells.size());
  topo->cell_edges.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const auto& cell = topo->cells[c];
    for (int i = 0; i < 3; ++i) {
      const int a = cell[(i + 1) % 3];
      const int b = cell[(i + 2) % 3];
      const int lo = std::min(a, b);
      const int hi = std::max(a, b);
      int e = topo->find_edge(lo, hi);
      if (e < 0) {
        e = static_cast<int>(topo->edges.size());
        topo->edges.push_back({lo, hi});
        topo->edge_cells.push_back({c, -1});
        topo->vertex_edges_[lo].emplace_back(hi, e);
        topo->vertex_edges_[hi].emplace_back(lo, e);
      } else {
        auto& adj = topo->edge_cells[e];
        if (adj[1] != -1) throw GenerationFailure("edge " + std::to_string(e) + " borders more than two cells");
        // The neighbour must traverse the shared edge in the opposite direction.
        const auto& other = topo->cells[adj[0]];
        for (int k = 0; k < 3; ++k)
          if (other[k] == a && other[(k + 1) % 3] == b)
            throw GenerationFailure("cells " + std::to_string(adj[0]) + " and " + std::to_string(c) +
                                    " overlap along an edge");
        adj[1] = c;
      }
      topo->cell_edges[c][i] = e;
    }
  }

  const int ne = static_cast<int>(topo->edges.size());
  topo->boundary_edge.assign(ne, false);
  topo->boundary_vertex.assign(nv, false);
  for (int e = 0; e < ne; ++e) {
    if (topo->edge_cells[e][1] == -1) {
      topo->boundary_edge[e] = true;
      topo->boundary_vertex[topo->edges[e][0]] = true;
      topo->boundary_vertex[topo->edges[e][1]] = true;
    }
  }

  Mesh mesh;
  mesh.topology_ = std::move(topo);
  mesh.vertices_ = std::move(vertices);
  return mesh;
}

Mesh Mesh::with_vertices(std::vector<Vec2> vertices) const {
  if (static_cast<int>(vertices.size()) != num_vertices())
    throw ShapeMismatch("vertex count " + std::to_string(vertices.size()) + " does not match mesh (" +
                        std::to_string(num_vertices()) + ")");
  Mesh mesh;
  mesh.topology_ = topology_;
  mesh.vertices_ = std::move(vertices);
  return mesh;
}

double Mesh::cell_area(int c) const {
  const auto& t = cell(c);
  return triangle_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

double Mesh::cell_diameter(int c) const {
  const auto& t = cell(c);
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d = std::max(d, (vertices_[t[i]] - vertices_[t[(i + 1) % 3]]).norm());
  return d;
}

double Mesh::edge_length(int e) const {
  const auto& ed = edge(e);
  return (vertices_[ed[1]] - vertices_[ed[0]]).norm();
}

Vec2 Mesh::edge_tangent(int e) const {
  const auto& ed = edge(e);
  return (vertices_[ed[1]] - vertices_[ed[0]]).normalized();
}

std::pair<Vec2, Vec2> Mesh::bounding_box() const {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const Vec2& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

double Mesh::min_cell_area() const {
  double m = std::numeric_limits<double>::infinity();
  for (int c = 0; c < num_cells(); ++c) m = std::min(m, cell_area(c));
  return m;
}

double CurveLoop::perimeter0() const {
  double p = 0.0;
  for (double l : length0) p += l;
  return p;
}

CurveLoop build_curve_loop(const Mesh& mesh, std::span<const std::array<int, 2>> segments) {
  const MeshTopology& topo = mesh.topology();
  if (segments.empty()) throw CurveNotClosed("no curve segments given");

  std::vector<int> edge_ids;
  edge_ids.reserve(segments.size());
  for (const auto& s : segments) {
    const int e = topo.find_edge(s[0], s[1]);
    if (e < 0)
      throw ParseError("curve segment (" + std::to_string(s[0]) + ", " + std::to_string(s[1]) +
                       ") is not a mesh edge");
    if (topo.boundary_vertex[s[0]] || topo.boundary_vertex[s[1]])
      throw CurveOnBoundary("curve segment (" + std::to_string(s[0]) + ", " + std::to_string(s[1]) +
                            ") touches the domain boundary");
    if (std::find(edge_ids.begin(), edge_ids.end(), e) != edge_ids.end())
      throw CurveNotClosed("curve segment repeated");
    edge_ids.push_back(e);
  }

  // Each loop vertex must have exactly two incident curve edges.
  std::vector<std::vector<int>> incident(mesh.num_vertices());
  for (int e : edge_ids)
    for (int v : topo.edges[e]) incident[v].push_back(e);
  for (int e : edge_ids)
    for (int v : topo.edges[e])
      if (incident[v].size() != 2)
        throw CurveNotClosed("vertex " + std::to_string(v) + " has " + std::to_string(incident[v].size()) +
                             " incident curve segments");

  CurveLoop loop;
  const int start_edge = edge_ids.front();
  int current = topo.edges[start_edge][0];
  int e = start_edge;
  do {
    loop.edges.push_back(e);
    loop.vertices.push_back(current);
    const auto& ed = topo.edges[e];
    const int next = ed[0] == current ? ed[1] : ed[0];
    const auto& inc = incident[next];
    e = inc[0] == e ? inc[1] : inc[0];
    current = next;
  } while (e != start_edge && loop.edges.size() <= edge_ids.size());

  if (loop.edges.size() != edge_ids.size())
    throw CurveNotClosed("curve segments form " + std::string(loop.edges.size() < edge_ids.size() ? "more than one" : "no") +
                         " closed cycle");

  Polygon poly;
  for (int v : loop.vertices) poly.push_back(mesh.vertex(v));
  if (polygon_area(poly) < 0.0) {
    // Reverse: facet f of the reversed loop runs vertices'[f] -> vertices'[f+1].
    const int n = static_cast<int>(loop.edges.size());
    std::vector<int> verts(n), edges(n);
    for (int f = 0; f < n; ++f) {
      verts[f] = loop.vertices[(n - f) % n];
      edges[f] = loop.edges[(2 * n - f - 1) % n];
    }
    loop.vertices = std::move(verts);
    loop.edges = std::move(edges);
  }

  const int n = static_cast<int>(loop.edges.size());
  for (int f = 0; f < n; ++f) {
    const int a = loop.vertices[f];
    const int b = loop.vertices[(f + 1) % n];
    const Vec2 d = mesh.vertex(b) - mesh.vertex(a);
    const double len = d.norm();
    if (!(len > 0.0)) throw CurveNotClosed("zero-length curve facet");
    const Vec2 t = d / len;
    loop.orientation.push_back(a < b ? 1 : -1);
    loop.length0.push_back(len);
    loop.normal0.emplace_back(t.y(), -t.x());
    loop.midpoint0.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
  }
  return loop;
}

Polygon curve_polygon(const Mesh& mesh, const CurveLoop& curve) {
  Polygon poly;
  poly.reserve(curve.vertices.size());
  for (int v : curve.vertices) poly.push_back(mesh.vertex(v));
  return poly;
}

void MeshGenConfig::validate() const {
  if (!(h > 0.0)) throw ConfigError("mesh size h must be positive");
  if (segments < 8) throw ConfigError("circle segment count must be at least 8");
  if (!(radius > 0.0)) throw ConfigError("circle radius must be positive");
  if (!(radius < half_width)) throw ConfigError("circle radius must be smaller than the half-width");
}

namespace {

Mat2 edge_matrix(const Mesh& mesh, int cell) {
  const auto& t = mesh.cell(cell);
  Mat2 e;
  e.col(0) = mesh.vertex(t[1]) - mesh.vertex(t[0]);
  e.col(1) = mesh.vertex(t[2]) - mesh.vertex(t[0]);
  return e;
}

}  // namespace

Mat2 deformation_gradient(const Mesh& mesh0, const Mesh& mesh_t, int cell) {
  if (!mesh0.shares_topology_with(mesh_t) && mesh0.num_cells() != mesh_t.num_cells())
    throw ShapeMismatch("meshes do not share connectivity");
  if (cell < 0 || cell >= mesh0.num_cells()) throw PreconditionViolation("cell index out of range");
  const Mat2 e0 = edge_matrix(mesh0, cell);
  const Mat2 et = edge_matrix(mesh_t, cell);
  const double scale = std::max(e0.col(0).squaredNorm(), e0.col(1).squaredNorm());
  const double det0 = e0.determinant();
  if (std::abs(det0) <= 1e-14 * scale) throw SingularCell("template cell " + std::to_string(cell) + " is degenerate");
  return et * e0.inverse();
}

Mesh displace(const Mesh& mesh_t, std::span<const Vec2> vertex_velocities, double dt) {
  if (static_cast<int>(vertex_velocities.size()) != mesh_t.num_vertices())
    throw ShapeMismatch("one velocity per vertex required");
  const MeshTopology& topo = mesh_t.topology();
  std::vector<Vec2> moved(mesh_t.vertices().begin(), mesh_t.vertices().end());
  for (int v = 0; v < mesh_t.num_vertices(); ++v) {
    const Vec2& u = vertex_velocities[v];
    if (topo.boundary_vertex[v] && (u.x() != 0.0 || u.y() != 0.0))
      throw PreconditionViolation("nonzero velocity at boundary vertex " + std::to_string(v));
    moved[v] += dt * u;
  }
  Mesh next = mesh_t.with_vertices(std::move(moved));
  for (int c = 0; c < next.num_cells(); ++c)
    if (!(next.cell_area(c) > 0.0))
      throw TangledMesh("cell " + std::to_string(c) + " has nonpositive area after displacement");
  return next;
}

}  // namespace wxreg
