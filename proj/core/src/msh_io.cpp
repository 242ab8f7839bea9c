#include "wxreg/errors.hpp"
#include "wxreg/mesh.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>

namespace wxreg {

namespace {

constexpr int kLineElement = 1;
constexpr int kTriangleElement = 2;

std::string next_line(std::istringstream& in, int& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return line;
  }
  throw ParseError("unexpected end of file after line " + std::to_string(line_no));
}

[[noreturn]] void fail(int line_no, const std::string& msg) {
  throw ParseError("line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

TemplateMesh parse_msh(const std::string& contents, int curve_tag) {
  std::istringstream in(contents);
  int line_no = 0;

  std::map<long, Vec2> nodes;
  std::vector<std::array<long, 3>> triangles;
  std::vector<std::array<long, 2>> curve_lines;
  bool have_format = false, have_nodes = false, have_elements = false;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    if (line == "$MeshFormat") {
      std::istringstream fmtline(next_line(in, line_no));
      double version = 0.0;
      int file_type = -1, data_size = 0;
      if (!(fmtline >> version >> file_type >> data_size)) fail(line_no, "malformed $MeshFormat header");
      if (version < 2.0 || version >= 3.0) fail(line_no, "only MSH 2.x is supported");
      if (file_type != 0) fail(line_no, "only ASCII MSH files are supported");
      if (next_line(in, line_no) != "$EndMeshFormat") fail(line_no, "expected $EndMeshFormat");
      have_format = true;
    } else if (line == "$PhysicalNames") {
      // Names are informational only.
      std::string l;
      do {
        l = next_line(in, line_no);
      } while (l != "$EndPhysicalNames");
    } else if (line == "$Nodes") {
      long count = 0;
      if (!(std::istringstream(next_line(in, line_no)) >> count) || count < 0) fail(line_no, "bad node count");
      for (long k = 0; k < count; ++k) {
        std::istringstream row(next_line(in, line_no));
        long id = 0;
        double x = 0, y = 0, z = 0;
        if (!(row >> id >> x >> y >> z)) fail(line_no, "malformed node record");
        if (!nodes.emplace(id, Vec2(x, y)).second) fail(line_no, "duplicate node id " + std::to_string(id));
      }
      if (next_line(in, line_no) != "$EndNodes") fail(line_no, "expected $EndNodes");
      have_nodes = true;
    } else if (line == "$Elements") {
      long count = 0;
      if (!(std::istringstream(next_line(in, line_no)) >> count) || count < 0) fail(line_no, "bad element count");
      for (long k = 0; k < count; ++k) {
        std::istringstream row(next_line(in, line_no));
        long id = 0;
        int type = 0, ntags = 0;
        if (!(row >> id >> type >> ntags) || ntags < 0) fail(line_no, "malformed element record");
        std::vector<long> tags(ntags);
        for (auto& t : tags)
          if (!(row >> t)) fail(line_no, "missing element tag");
        const int physical = ntags > 0 ? static_cast<int>(tags[0]) : 0;
        if (type == kLineElement) {
          std::array<long, 2> v{};
          if (!(row >> v[0] >> v[1])) fail(line_no, "line element needs 2 nodes");
          if (physical == curve_tag) curve_lines.push_back(v);
        } else if (type == kTriangleElement) {
          std::array<long, 3> v{};
          if (!(row >> v[0] >> v[1] >> v[2])) fail(line_no, "triangle element needs 3 nodes");
          triangles.push_back(v);
        } else {
          fail(line_no, "unsupported element type " + std::to_string(type));
        }
      }
      if (next_line(in, line_no) != "$EndElements") fail(line_no, "expected $EndElements");
      have_elements = true;
    } else if (line.front() == '$') {
      fail(line_no, "unsupported section " + line);
    } else {
      fail(line_no, "unexpected content outside a section");
    }
  }
  if (!have_format) throw ParseError("missing $MeshFormat section");
  if (!have_nodes) throw ParseError("missing $Nodes section");
  if (!have_elements) throw ParseError("missing $Elements section");
  if (triangles.empty()) throw ParseError("no triangles in file");

  // Only nodes referenced by triangles become mesh vertices, numbered in id order.
  std::map<long, int> index;
  for (const auto& t : triangles)
    for (long id : t) {
      if (!nodes.count(id)) throw ParseError("triangle references unknown node " + std::to_string(id));
      index.emplace(id, 0);
    }
  std::vector<Vec2> vertices;
  vertices.reserve(index.size());
  for (auto& [id, idx] : index) {
    idx = static_cast<int>(vertices.size());
    vertices.push_back(nodes.at(id));
  }
  std::vector<std::array<int, 3>> cells;
  cells.reserve(triangles.size());
  for (const auto& t : triangles) cells.push_back({index.at(t[0]), index.at(t[1]), index.at(t[2])});

  Mesh mesh;
  try {
    mesh = Mesh::from_cells(std::move(vertices), std::move(cells));
  } catch (const GenerationFailure& e) {
    throw ParseError(std::string("invalid triangulation: ") + e.what());
  }

  std::vector<std::array<int, 2>> segments;
  for (const auto& l : curve_lines) {
    auto a = index.find(l[0]);
    auto b = index.find(l[1]);
    if (a == index.end() || b == index.end()) throw ParseError("curve line references a node outside the triangulation");
    segments.push_back({a->second, b->second});
  }
  CurveLoop curve = build_curve_loop(mesh, segments);
  return {std::move(mesh), std::move(curve)};
}

TemplateMesh load_msh(const std::string& path, int curve_tag) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_msh(buffer.str(), curve_tag);
}

std::string format_msh(const Mesh& mesh, const CurveLoop& curve, int curve_tag) {
  std::string out = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n";
  out += fmt::format("{}\n", mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v)
    out += fmt::format("{} {:.17g} {:.17g} 0\n", v + 1, mesh.vertex(v).x(), mesh.vertex(v).y());
  out += "$EndNodes\n$Elements\n";
  out += fmt::format("{}\n", curve.num_facets() + mesh.num_cells());
  long id = 1;
  const int n = curve.num_facets();
  for (int f = 0; f < n; ++f)
    out += fmt::format("{} 1 2 {} {} {} {}\n", id++, curve_tag, curve_tag, curve.vertices[f] + 1,
                       curve.vertices[(f + 1) % n] + 1);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cell(c);
    out += fmt::format("{} 2 2 0 1 {} {} {}\n", id++, t[0] + 1, t[1] + 1, t[2] + 1);
  }
  out += "$EndElements\n";
  return out;
}

void write_msh(const std::string& path, const Mesh& mesh, const CurveLoop& curve, int curve_tag) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << format_msh(mesh, curve, curve_tag);
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace wxreg
