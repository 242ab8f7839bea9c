#pragma once

#include "wxreg/types.hpp"

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wxreg {

/// Connectivity of a triangulation. Shared between a template mesh and all of
/// its moved copies; never edited after construction.
struct MeshTopology {
  /// Vertex triples, counterclockwise in the template configuration.
  std::vector<std::array<int, 3>> cells;
  /// Vertex pairs, lower index first. Tangents run from first to second.
  std::vector<std::array<int, 2>> edges;
  /// Local edge i of a cell is opposite its local vertex i.
  std::vector<std::array<int, 3>> cell_edges;
  /// Cells adjacent to each edge; the second entry is -1 on the boundary.
  std::vector<std::array<int, 2>> edge_cells;
  std::vector<bool> boundary_vertex;
  std::vector<bool> boundary_edge;

  int num_vertices() const { return static_cast<int>(boundary_vertex.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  /// Edge index joining vertices a and b, or -1.
  int find_edge(int a, int b) const;

 private:
  friend class Mesh;
  std::vector<std::vector<std::pair<int, int>>> vertex_edges_;  // (neighbor, edge)
};

/// Triangulation of a planar domain: shared topology plus vertex coordinates.
/// Moving the mesh produces a new Mesh with the same topology object.
class Mesh {
 public:
  Mesh() = default;

  /// Builds topology from raw cells. Cells are reoriented counterclockwise;
  /// degenerate cells or non-manifold edges raise GenerationFailure.
  static Mesh from_cells(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells);

  /// Same topology, new coordinates.
  Mesh with_vertices(std::vector<Vec2> vertices) const;

  const MeshTopology& topology() const { return *topology_; }
  const std::shared_ptr<const MeshTopology>& shared_topology() const { return topology_; }
  bool shares_topology_with(const Mesh& other) const { return topology_ == other.topology_; }

  std::span<const Vec2> vertices() const { return vertices_; }
  const Vec2& vertex(int v) const { return vertices_[v]; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return topology_->num_cells(); }
  int num_edges() const { return topology_->num_edges(); }

  const std::array<int, 3>& cell(int c) const { return topology_->cells[c]; }
  const std::array<int, 2>& edge(int e) const { return topology_->edges[e]; }

  double cell_area(int c) const;
  /// Longest edge of the cell.
  double cell_diameter(int c) const;
  double edge_length(int e) const;
  /// Unit tangent from the lower-numbered to the higher-numbered vertex.
  Vec2 edge_tangent(int e) const;

  /// Axis-aligned bounding box as (min, max).
  std::pair<Vec2, Vec2> bounding_box() const;

  /// Smallest signed cell area; positive for an untangled mesh.
  double min_cell_area() const;

 private:
  std::shared_ptr<const MeshTopology> topology_;
  std::vector<Vec2> vertices_;
};

/// Closed loop of interior mesh edges describing the template curve.
/// Template quantities are fixed at construction.
struct CurveLoop {
  /// Mesh edge of each facet, in counterclockwise loop order.
  std::vector<int> edges;
  /// Loop vertices; facet f runs from vertices[f] to vertices[(f + 1) % n].
  std::vector<int> vertices;
  /// +1 if facet f traverses its edge from lower to higher vertex, else -1.
  std::vector<int> orientation;
  std::vector<double> length0;
  std::vector<Vec2> normal0;
  std::vector<Vec2> midpoint0;

  int num_facets() const { return static_cast<int>(edges.size()); }
  double perimeter0() const;
};

/// Chains unordered curve segments (vertex pairs) into a counterclockwise loop
/// of interior edges of `mesh`.
/// Throws CurveNotClosed, CurveOnBoundary, or ParseError for missing edges.
CurveLoop build_curve_loop(const Mesh& mesh, std::span<const std::array<int, 2>> segments);

/// Current positions of the loop vertices.
Polygon curve_polygon(const Mesh& mesh, const CurveLoop& curve);

struct MeshGenConfig {
  double half_width = 10.0;
  double h = 1.0;
  double radius = 1.0;
  int segments = 48;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct TemplateMesh {
  Mesh mesh;
  CurveLoop curve;
};

/// Triangulates [-half_width, half_width]^2 with the regular `segments`-gon of
/// the given radius embedded in the interior edges. Rings of vertices graded
/// from the curve spacing up to h surround the polygon; a hexagonal lattice
/// fills the rest.
TemplateMesh generate_template_mesh(const MeshGenConfig& config);

/// F = E_t E_0^{-1} from two edge vectors of the cell in either configuration.
/// Throws SingularCell for a degenerate template cell.
Mat2 deformation_gradient(const Mesh& mesh0, const Mesh& mesh_t, int cell);

/// Moves every vertex by dt * velocity. Boundary vertices must have zero
/// velocity (PreconditionViolation); a nonpositive cell area raises TangledMesh.
Mesh displace(const Mesh& mesh_t, std::span<const Vec2> vertex_velocities, double dt);

/// Minimal MSH 2.2 ASCII support: nodes, 2-node lines and 3-node triangles.
/// Lines whose physical tag equals `curve_tag` form the template curve.
TemplateMesh load_msh(const std::string& path, int curve_tag);
TemplateMesh parse_msh(const std::string& contents, int curve_tag);
void write_msh(const std::string& path, const Mesh& mesh, const CurveLoop& curve, int curve_tag);
std::string format_msh(const Mesh& mesh, const CurveLoop& curve, int curve_tag);

}  // namespace wxreg
