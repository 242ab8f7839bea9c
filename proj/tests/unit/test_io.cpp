#include "temp_dir.hpp"

#include "wxreg/errors.hpp"
#include "wxreg/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <numbers>

using namespace wxreg;
using test::TempDir;

TEST_SUITE("io") {
  TEST_CASE("doubles round trip through text") {
    for (double v : {0.1, -1.0 / 3.0, std::numbers::pi * 1e-300, 6.02214076e23, 0.0})
      CHECK(std::stod(format_double(v)) == v);
  }

  TEST_CASE("polygon and momentum CSV round trip") {
    TempDir dir;
    const Polygon p{Vec2(0.1, -0.2), Vec2(1.0 / 3.0, 2.0), Vec2(-7.5, 1e-9)};
    write_polygon_csv(dir.file("p.csv"), p);
    CHECK(read_text(dir.file("p.csv")).rfind("vertex_index,x,y\n0,", 0) == 0);
    CHECK(read_polygon_csv(dir.file("p.csv")) == p);

    const MomentumField m{1.5, -2.25, 1.0 / 7.0};
    write_momentum_csv(dir.file("m.csv"), m);
    CHECK(read_momentum_csv(dir.file("m.csv")) == m);
  }

  TEST_CASE("corrupt CSV names the file") {
    TempDir dir;
    write_text(dir.file("bad.csv"), "facet,value\n0,1.0\n1,abc\n");
    try {
      read_momentum_csv(dir.file("bad.csv"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
    }
    write_text(dir.file("order.csv"), "facet,value\n1,1.0\n");
    CHECK_THROWS_AS(read_momentum_csv(dir.file("order.csv")), ParseError);
    write_text(dir.file("hdr.csv"), "x,y\n");
    CHECK_THROWS_AS(read_polygon_csv(dir.file("hdr.csv")), ParseError);
    CHECK_THROWS_AS(read_text(dir.file("missing.csv")), IoError);
  }

  TEST_CASE("diagnostics CSV: empty R and seconds columns") {
    std::vector<IterationDiagnostics> rows(2);
    rows[0].E = 0.5;
    rows[0].S = 2.0;
    rows[0].seconds = 1.25;
    rows[1].iteration = 1;
    rows[1].E = 0.25;
    rows[1].R = 0.75;
    rows[1].S = 1.0;
    CHECK(format_diagnostics_csv(rows, false) == "iteration,E,R,S,seconds\n0,0.5,,2,\n1,0.25,0.75,1,\n");
    CHECK(format_diagnostics_csv(rows, true) == "iteration,E,R,S,seconds\n0,0.5,,2,1.25\n1,0.25,0.75,1,0\n");
  }

  TEST_CASE("raster dump: little-endian bytes and JSON sidecar") {
    TempDir dir;
    RasterSpec spec;
    spec.nx = 9;
    spec.ny = 8;
    RasterField f(spec);
    for (int k = 0; k < 72; ++k) f.values[k] = 0.5 * k - 1.0 / 3.0;
    write_raster(dir.file("r.bin"), f, 10.0);
    CHECK(std::filesystem::file_size(dir.file("r.bin")) == 72 * 8);
    const auto meta = nlohmann::json::parse(read_text(dir.file("r.bin.json")));
    CHECK(meta.at("nx") == 9);
    CHECK(meta.at("ny") == 8);
    CHECK(meta.at("kappa") == 10.0);
    CHECK(meta.at("bbox").size() == 4);
    const RasterField g = read_raster(dir.file("r.bin"));
    CHECK(g.spec == spec);
    CHECK(g.values == f.values);
    // index order, 8 bytes per value (this host is little-endian)
    const std::string bytes = read_text(dir.file("r.bin"));
    double second;
    std::memcpy(&second, bytes.data() + 8, 8);
    CHECK(second == f.values[1]);
  }

  TEST_CASE("raster dump with a truncated payload is rejected") {
    TempDir dir;
    RasterSpec spec;
    spec.nx = spec.ny = 8;
    write_raster(dir.file("r.bin"), RasterField(spec, 1.0), 1.0);
    write_text(dir.file("r.bin"), std::string(12, '\0'));
    CHECK_THROWS_AS(read_raster(dir.file("r.bin")), ParseError);
  }

  TEST_CASE("mesh snapshot and trajectory files") {
    TempDir dir;
    MeshGenConfig cfg;
    cfg.segments = 8;
    cfg.half_width = 3;
    const TemplateMesh t = generate_template_mesh(cfg);
    write_mesh_snapshot(dir.file("snap"), t.mesh, t.curve);
    const auto meta = nlohmann::json::parse(read_text(dir.file("snap/mesh.json")));
    CHECK(meta.at("num_vertices") == t.mesh.num_vertices());
    CHECK(meta.at("num_cells") == t.mesh.num_cells());
    CHECK(meta.at("curve_facets").size() == 8);
    CHECK(read_text(dir.file("snap/vertices.csv")).rfind("id,x,y\n", 0) == 0);
    CHECK(read_text(dir.file("snap/cells.csv")).rfind("id,v0,v1,v2\n", 0) == 0);

    Trajectory tr;
    tr.curves = {curve_polygon(t.mesh, t.curve), curve_polygon(t.mesh, t.curve)};
    write_trajectory_csv(dir.file("traj.csv"), tr);
    const std::string s = read_text(dir.file("traj.csv"));
    CHECK(s.rfind("step,vertex_index,x,y\n0,0,", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 16);
  }

  TEST_CASE("ensemble CSV layout") {
    TempDir dir;
    Ensemble e;
    e.members = {{1.0, 2.0}, {3.0, 4.0}};
    e.valid = {true, true};
    write_ensemble_csv(dir.file("e.csv"), e);
    CHECK(read_text(dir.file("e.csv")) == "member,facet,value\n0,0,1\n0,1,2\n1,0,3\n1,1,4\n");
  }
}
