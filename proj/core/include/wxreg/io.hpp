#pragma once

#include "wxreg/eki.hpp"
#include "wxreg/forward_model.hpp"
#include "wxreg/mesh.hpp"
#include "wxreg/misfit_raster.hpp"
#include "wxreg/momentum.hpp"

#include <span>
#include <string>
#include <vector>

namespace wxreg {

/// Shortest decimal text that reads back to the same double (%.17g).
std::string format_double(double v);

/// Writes `contents` to `path`, throwing IoError on failure.
void write_text(const std::string& path, const std::string& contents);
std::string read_text(const std::string& path);

/// vertex_index,x,y
std::string format_polygon_csv(const Polygon& polygon);
void write_polygon_csv(const std::string& path, const Polygon& polygon);
Polygon read_polygon_csv(const std::string& path);

/// facet,value
void write_momentum_csv(const std::string& path, std::span<const double> momentum);
/// Throws ParseError for malformed rows or facets out of order.
MomentumField read_momentum_csv(const std::string& path);

/// member,facet,value
void write_ensemble_csv(const std::string& path, const Ensemble& ensemble);

/// step,vertex_index,x,y
void write_trajectory_csv(const std::string& path, const Trajectory& trajectory);

/// iteration,E,R,S,seconds. R is empty when absent; seconds is empty unless
/// `include_seconds`, so repeated runs produce identical files.
std::string format_diagnostics_csv(std::span<const IterationDiagnostics> rows, bool include_seconds);
void write_diagnostics_csv(const std::string& path, std::span<const IterationDiagnostics> rows, bool include_seconds);

/// Little-endian float64 values in index order at `path` plus a JSON sidecar
/// at `path + ".json"` with nx, ny, bbox and kappa.
void write_raster(const std::string& path, const RasterField& field, double kappa);
RasterField read_raster(const std::string& path);

/// vertices.csv (id,x,y), cells.csv (id,v0,v1,v2) and mesh.json (counts and
/// the curve facet list) in `directory`.
void write_mesh_snapshot(const std::string& directory, const Mesh& mesh, const CurveLoop& curve);

}  // namespace wxreg
