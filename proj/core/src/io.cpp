#include "wxreg/io.hpp"

#include "wxreg/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wxreg {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError(where + ": trailing characters in '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(where + ": not a number: '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw ParseError(where + ": trailing characters in '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ParseError(where + ": not an integer: '" + s + "'");
  }
}

// Rows of a CSV file with the given header, header excluded.
std::vector<std::vector<std::string>> read_csv(const std::string& path, const std::string& header) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw ParseError(path + ": expected header '" + header + "'");
  const std::size_t ncols = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != ncols) throw ParseError(path + ":" + std::to_string(line_no) + ": wrong number of columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_text(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out) throw IoError("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_polygon_csv(const Polygon& polygon) {
  std::string out = "vertex_index,x,y\n";
  for (std::size_t k = 0; k < polygon.size(); ++k)
    out += fmt::format("{},{},{}\n", k, format_double(polygon[k].x()), format_double(polygon[k].y()));
  return out;
}

void write_polygon_csv(const std::string& path, const Polygon& polygon) { write_text(path, format_polygon_csv(polygon)); }

Polygon read_polygon_csv(const std::string& path) {
  Polygon out;
  for (const auto& row : read_csv(path, "vertex_index,x,y")) {
    if (parse_long(row[0], path) != static_cast<long>(out.size())) throw ParseError(path + ": vertices out of order");
    out.emplace_back(parse_double(row[1], path), parse_double(row[2], path));
  }
  return out;
}

void write_momentum_csv(const std::string& path, std::span<const double> momentum) {
  std::string out = "facet,value\n";
  for (std::size_t f = 0; f < momentum.size(); ++f) out += fmt::format("{},{}\n", f, format_double(momentum[f]));
  write_text(path, out);
}

MomentumField read_momentum_csv(const std::string& path) {
  MomentumField out;
  for (const auto& row : read_csv(path, "facet,value")) {
    if (parse_long(row[0], path) != static_cast<long>(out.size())) throw ParseError(path + ": facets out of order");
    const double v = parse_double(row[1], path);
    if (!std::isfinite(v)) throw ParseError(path + ": non-finite momentum value");
    out.push_back(v);
  }
  return out;
}

void write_ensemble_csv(const std::string& path, const Ensemble& ensemble) {
  std::string out = "member,facet,value\n";
  for (int j = 0; j < ensemble.size(); ++j)
    for (std::size_t f = 0; f < ensemble.members[j].size(); ++f)
      out += fmt::format("{},{},{}\n", j, f, format_double(ensemble.members[j][f]));
  write_text(path, out);
}

void write_trajectory_csv(const std::string& path, const Trajectory& trajectory) {
  std::string out = "step,vertex_index,x,y\n";
  for (std::size_t k = 0; k < trajectory.curves.size(); ++k)
    for (std::size_t v = 0; v < trajectory.curves[k].size(); ++v)
      out += fmt::format("{},{},{},{}\n", k, v, format_double(trajectory.curves[k][v].x()),
                         format_double(trajectory.curves[k][v].y()));
  write_text(path, out);
}

std::string format_diagnostics_csv(std::span<const IterationDiagnostics> rows, bool include_seconds) {
  std::string out = "iteration,E,R,S,seconds\n";
  for (const auto& d : rows)
    out += fmt::format("{},{},{},{},{}\n", d.iteration, format_double(d.E), d.R ? format_double(*d.R) : "",
                       format_double(d.S), include_seconds ? format_double(d.seconds) : "");
  return out;
}

void write_diagnostics_csv(const std::string& path, std::span<const IterationDiagnostics> rows, bool include_seconds) {
  write_text(path, format_diagnostics_csv(rows, include_seconds));
}

void write_raster(const std::string& path, const RasterField& field, double kappa) {
  std::string bytes(field.values.size() * sizeof(double), '\0');
  for (std::size_t k = 0; k < field.values.size(); ++k) {
    auto bits = std::bit_cast<std::uint64_t>(field.values[k]);
    for (int b = 0; b < 8; ++b) bytes[8 * k + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  write_text(path, bytes);
  nlohmann::ordered_json meta;
  meta["nx"] = field.spec.nx;
  meta["ny"] = field.spec.ny;
  meta["bbox"] = {field.spec.lo.x(), field.spec.lo.y(), field.spec.hi.x(), field.spec.hi.y()};
  meta["kappa"] = kappa;
  meta["dtype"] = "float64";
  meta["byte_order"] = "little";
  meta["layout"] = "row-major, index = j * nx + i";
  write_text(path + ".json", meta.dump(2) + "\n");
}

RasterField read_raster(const std::string& path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text(path + ".json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ".json: " + e.what());
  }
  RasterSpec spec;
  try {
    spec.nx = meta.at("nx").get<int>();
    spec.ny = meta.at("ny").get<int>();
    const auto& b = meta.at("bbox");
    spec.lo = Vec2(b.at(0).get<double>(), b.at(1).get<double>());
    spec.hi = Vec2(b.at(2).get<double>(), b.at(3).get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ".json: " + e.what());
  }
  spec.validate();
  const std::string bytes = read_text(path);
  if (bytes.size() != static_cast<std::size_t>(spec.size()) * 8)
    throw ParseError(path + ": expected " + std::to_string(spec.size() * 8) + " bytes");
  RasterField field(spec);
  for (std::size_t k = 0; k < field.values.size(); ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 * k + b])) << (8 * b);
    field.values[k] = std::bit_cast<double>(bits);
  }
  return field;
}

void write_mesh_snapshot(const std::string& directory, const Mesh& mesh, const CurveLoop& curve) {
  std::filesystem::create_directories(directory);
  std::string v = "id,x,y\n";
  for (int i = 0; i < mesh.num_vertices(); ++i)
    v += fmt::format("{},{},{}\n", i, format_double(mesh.vertex(i).x()), format_double(mesh.vertex(i).y()));
  write_text(directory + "/vertices.csv", v);
  std::string c = "id,v0,v1,v2\n";
  for (int i = 0; i < mesh.num_cells(); ++i) {
    const auto& t = mesh.cell(i);
    c += fmt::format("{},{},{},{}\n", i, t[0], t[1], t[2]);
  }
  write_text(directory + "/cells.csv", c);
  nlohmann::ordered_json meta;
  meta["num_vertices"] = mesh.num_vertices();
  meta["num_cells"] = mesh.num_cells();
  meta["num_edges"] = mesh.num_edges();
  nlohmann::ordered_json facets = nlohmann::ordered_json::array();
  for (int f = 0; f < curve.num_facets(); ++f)
    facets.push_back({{"facet", f},
                      {"edge", curve.edges[f]},
                      {"v0", curve.vertices[f]},
                      {"v1", curve.vertices[(f + 1) % curve.num_facets()]}});
  meta["curve_facets"] = facets;
  write_text(directory + "/mesh.json", meta.dump(2) + "\n");
}

}  // namespace wxreg
