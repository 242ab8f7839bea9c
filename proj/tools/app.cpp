#include "app.hpp"

#include "wxreg/errors.hpp"
#include "wxreg/io.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <set>
#include <sstream>

namespace wxreg::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}{}'", where.empty() ? "" : where + ".", key));
}

template <class T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}.{} has the wrong type", where, key));
  }
}

template <class T>
void read(const json& obj, const std::string& where, const char* key, std::optional<T>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(obj, where, key, v);
  out = v;
}

// get<int> silently truncates doubles; reject them.
void read_int(const json& obj, const std::string& where, const char* key, int& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number_integer()) throw ConfigError(fmt::format("{}.{} must be an integer", where, key));
  read(obj, where, key, out);
}

void read_forward(const json& obj, const char* key, ForwardSection& out) {
  if (!obj.contains(key)) return;
  const json& s = obj.at(key);
  check_keys(s, key, {"alpha", "steps"});
  read(s, key, "alpha", out.alpha);
  read_int(s, key, "steps", out.steps);
}

json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json forward_json(const ForwardSection& f) { return json{{"alpha", f.alpha}, {"steps", f.steps}}; }

ForwardConfig to_forward_config(const ForwardSection& s) {
  ForwardConfig f;
  f.alpha = s.alpha;
  f.steps = s.steps;
  return f;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_config(const RunConfig& config) {
  write_text(path_in(config.output_dir, "config.json"), dump_config(config));
}

void note(const Options& options, std::ostream& log, const std::string& msg) {
  if (!options.quiet) log << msg << '\n';
}

std::string opt_to_string(const std::optional<double>& v) { return v ? fmt::format("{:.6g}", *v) : "-"; }

}  // namespace

void RunConfig::validate() const {
  mesh.generator.validate();
  for (const auto* f : {&target, &inversion, &forward}) to_forward_config(*f).validate();
  RasterSpec spec;
  spec.nx = raster.nx;
  spec.ny = raster.ny;
  spec.validate();
  Smoother s;
  s.kappa = raster.kappa;
  s.tolerance = raster.tolerance;
  s.validate();
  EKIConfig e;
  e.ensemble_size = eki.ensemble_size;
  e.xi = eki.xi;
  e.max_iterations = eki.max_iterations;
  e.misfit_tolerance = eki.misfit_tolerance;
  e.consensus_tolerance = eki.consensus_tolerance;
  e.init_low = eki.init_low;
  e.init_high = eki.init_high;
  e.validate();
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "",
             {"scenario", "mesh", "target", "inversion", "forward", "raster", "eki", "seed", "output_dir", "target_dir",
              "momentum_file", "record_timing"});
  RunConfig c;
  if (root.contains("scenario") && !root.at("scenario").is_null()) {
    if (!root.at("scenario").is_string()) throw ConfigError("scenario must be a string");
    const auto name = root.at("scenario").get<std::string>();
    c.scenario = parse_synthetic_kind(name);
    if (!c.scenario) throw ConfigError("unknown scenario '" + name + "'");
  }
  if (root.contains("mesh")) {
    const json& m = root.at("mesh");
    check_keys(m, "mesh", {"half_width", "h", "radius", "segments", "msh_path", "curve_tag"});
    read(m, "mesh", "half_width", c.mesh.generator.half_width);
    read(m, "mesh", "h", c.mesh.generator.h);
    read(m, "mesh", "radius", c.mesh.generator.radius);
    read_int(m, "mesh", "segments", c.mesh.generator.segments);
    read(m, "mesh", "msh_path", c.mesh.msh_path);
    read_int(m, "mesh", "curve_tag", c.mesh.curve_tag);
  }
  read_forward(root, "target", c.target);
  read_forward(root, "inversion", c.inversion);
  read_forward(root, "forward", c.forward);
  if (root.contains("raster")) {
    const json& r = root.at("raster");
    check_keys(r, "raster", {"nx", "ny", "kappa", "tolerance"});
    read_int(r, "raster", "nx", c.raster.nx);
    read_int(r, "raster", "ny", c.raster.ny);
    read(r, "raster", "kappa", c.raster.kappa);
    read(r, "raster", "tolerance", c.raster.tolerance);
  }
  if (root.contains("eki")) {
    const json& e = root.at("eki");
    check_keys(e, "eki",
               {"ensemble_size", "xi", "max_iterations", "misfit_tolerance", "consensus_tolerance", "init_low",
                "init_high"});
    read_int(e, "eki", "ensemble_size", c.eki.ensemble_size);
    read(e, "eki", "xi", c.eki.xi);
    read_int(e, "eki", "max_iterations", c.eki.max_iterations);
    read(e, "eki", "misfit_tolerance", c.eki.misfit_tolerance);
    read(e, "eki", "consensus_tolerance", c.eki.consensus_tolerance);
    read(e, "eki", "init_low", c.eki.init_low);
    read(e, "eki", "init_high", c.eki.init_high);
  }
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    c.seed = root.at("seed").get<std::uint64_t>();
  }
  read(root, "", "output_dir", c.output_dir);
  read(root, "", "target_dir", c.target_dir);
  read(root, "", "momentum_file", c.momentum_file);
  read(root, "", "record_timing", c.record_timing);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

std::string dump_config(const RunConfig& c) {
  json root;
  root["scenario"] = c.scenario ? json(std::string(to_string(*c.scenario))) : json(nullptr);
  root["mesh"] = json{{"half_width", c.mesh.generator.half_width},
                      {"h", c.mesh.generator.h},
                      {"radius", c.mesh.generator.radius},
                      {"segments", c.mesh.generator.segments},
                      {"msh_path", optional_json(c.mesh.msh_path)},
                      {"curve_tag", c.mesh.curve_tag}};
  root["target"] = forward_json(c.target);
  root["inversion"] = forward_json(c.inversion);
  root["forward"] = forward_json(c.forward);
  root["raster"] =
      json{{"nx", c.raster.nx}, {"ny", c.raster.ny}, {"kappa", c.raster.kappa}, {"tolerance", c.raster.tolerance}};
  root["eki"] = json{{"ensemble_size", c.eki.ensemble_size},
                     {"xi", c.eki.xi},
                     {"max_iterations", c.eki.max_iterations},
                     {"misfit_tolerance", optional_json(c.eki.misfit_tolerance)},
                     {"consensus_tolerance", optional_json(c.eki.consensus_tolerance)},
                     {"init_low", c.eki.init_low},
                     {"init_high", c.eki.init_high}};
  root["seed"] = c.seed;
  root["output_dir"] = c.output_dir;
  root["target_dir"] = optional_json(c.target_dir);
  root["momentum_file"] = optional_json(c.momentum_file);
  root["record_timing"] = c.record_timing;
  return root.dump(2) + "\n";
}

TemplateMesh build_template(const RunConfig& config) {
  if (config.mesh.msh_path) return load_msh(*config.mesh.msh_path, config.mesh.curve_tag);
  return generate_template_mesh(config.mesh.generator);
}

Scenario make_scenario(const RunConfig& config, const TemplateMesh& tmpl, const ForwardSection& forward) {
  Scenario s;
  s.mesh0 = tmpl.mesh;
  s.curve = tmpl.curve;
  s.forward = to_forward_config(forward);
  s.raster = RasterSpec::from_mesh(tmpl.mesh, config.raster.nx, config.raster.ny);
  s.smoother.kappa = config.raster.kappa;
  s.smoother.tolerance = config.raster.tolerance;
  return s;
}

void cmd_mesh_gen(const RunConfig& config, const Options& options, std::ostream& log) {
  const TemplateMesh tmpl = build_template(config);
  make_dir(config.output_dir);
  write_config(config);
  write_mesh_snapshot(path_in(config.output_dir, "mesh"), tmpl.mesh, tmpl.curve);
  write_msh(path_in(config.output_dir, "template.msh"), tmpl.mesh, tmpl.curve, config.mesh.curve_tag);
  write_polygon_csv(path_in(config.output_dir, "template_curve.csv"), curve_polygon(tmpl.mesh, tmpl.curve));
  note(options, log,
       fmt::format("mesh: {} vertices, {} cells, {} edges, {} curve facets", tmpl.mesh.num_vertices(),
                   tmpl.mesh.num_cells(), tmpl.mesh.num_edges(), tmpl.curve.num_facets()));
}

void cmd_make_target(const RunConfig& config, const Options& options, std::ostream& log) {
  if (!config.scenario) throw ConfigError("make-target needs a scenario (contract, squeeze, star, teardrop)");
  const TemplateMesh tmpl = build_template(config);
  const Scenario scenario = make_scenario(config, tmpl, config.target);
  const MomentumField p = synthetic_momentum(*config.scenario, tmpl.curve);

  make_dir(config.output_dir);
  write_config(config);
  const Polygon template_curve = curve_polygon(tmpl.mesh, tmpl.curve);
  write_polygon_csv(path_in(config.output_dir, "template_curve.csv"), template_curve);
  write_momentum_csv(path_in(config.output_dir, "true_momentum.csv"), p);
  const RasterField template_raster =
      smooth(rasterize_indicator(template_curve, scenario.raster), scenario.smoother);
  write_raster(path_in(config.output_dir, "template_raster.bin"), template_raster, scenario.smoother.kappa);

  const ForwardResult r = evaluate_forward(p, scenario);
  write_polygon_csv(path_in(config.output_dir, "target_curve.csv"), r.curve);
  write_raster(path_in(config.output_dir, "target_raster.bin"), r.tau, scenario.smoother.kappa);
  note(options, log,
       fmt::format("target {}: area {:.6g} (template {:.6g})", to_string(*config.scenario), polygon_area(r.curve),
                   polygon_area(template_curve)));
}

void cmd_forward(const RunConfig& config, const Options& options, std::ostream& log) {
  if (!config.momentum_file) throw ConfigError("forward needs a momentum file (momentum_file or --momentum)");
  const TemplateMesh tmpl = build_template(config);
  const MomentumField p = read_momentum_csv(*config.momentum_file);
  if (static_cast<int>(p.size()) != tmpl.curve.num_facets())
    throw ShapeMismatch(fmt::format("{} has {} values, the curve has {} facets", *config.momentum_file, p.size(),
                                    tmpl.curve.num_facets()));
  make_dir(config.output_dir);
  write_config(config);
  const Trajectory traj = integrate(tmpl.mesh, tmpl.curve, p, to_forward_config(config.forward));
  write_trajectory_csv(path_in(config.output_dir, "trajectory.csv"), traj);
  write_polygon_csv(path_in(config.output_dir, "final_curve.csv"), traj.curves.back());
  std::string energies = "step,energy\n";
  for (std::size_t k = 0; k < traj.energies.size(); ++k)
    energies += fmt::format("{},{}\n", k, format_double(traj.energies[k]));
  write_text(path_in(config.output_dir, "energies.csv"), energies);
  write_mesh_snapshot(path_in(config.output_dir, "final_mesh"), traj.final_mesh, tmpl.curve);
  note(options, log,
       fmt::format("forward: {} steps, area {:.6g} -> {:.6g}", config.forward.steps, polygon_area(traj.curves.front()),
                   polygon_area(traj.curves.back())));
}

void cmd_invert(const RunConfig& config, const Options& options, std::ostream& log) {
  const std::string target_dir = config.target_dir.value_or(config.output_dir);
  const TemplateMesh tmpl = build_template(config);
  const Scenario scenario = make_scenario(config, tmpl, config.inversion);
  const RasterField target = read_raster(path_in(target_dir, "target_raster.bin"));
  if (!(target.spec == scenario.raster))
    throw ShapeMismatch("target raster grid does not match the configured mesh and raster");
  std::optional<MomentumField> p_dagger;
  const std::string truth = path_in(target_dir, "true_momentum.csv");
  if (fs::exists(truth)) {
    p_dagger = read_momentum_csv(truth);
    if (static_cast<int>(p_dagger->size()) != tmpl.curve.num_facets())
      throw ShapeMismatch(truth + " does not match the curve facet count");
  }

  EKIConfig cfg;
  cfg.ensemble_size = config.eki.ensemble_size;
  cfg.xi = config.eki.xi;
  cfg.max_iterations = config.eki.max_iterations;
  cfg.misfit_tolerance = config.eki.misfit_tolerance;
  cfg.consensus_tolerance = config.eki.consensus_tolerance;
  cfg.seed = config.seed;
  cfg.init_low = config.eki.init_low;
  cfg.init_high = config.eki.init_high;
  cfg.jobs = options.jobs;

  make_dir(config.output_dir);
  write_config(config);
  write_polygon_csv(path_in(config.output_dir, "template_curve.csv"), curve_polygon(tmpl.mesh, tmpl.curve));
  const std::string target_curve = path_in(target_dir, "target_curve.csv");
  if (fs::exists(target_curve) && fs::absolute(target_dir) != fs::absolute(config.output_dir))
    fs::copy_file(target_curve, path_in(config.output_dir, "target_curve.csv"), fs::copy_options::overwrite_existing);

  std::vector<IterationDiagnostics> rows;
  std::string timing = "iteration,seconds\n";
  Polygon last_mean_curve;
  const EKIObserver observer = [&](int k, const Ensemble& ens, const Prediction& pred, const IterationDiagnostics& d) {
    rows.push_back(d);
    write_diagnostics_csv(path_in(config.output_dir, "diagnostics.csv"), rows, config.record_timing);
    write_ensemble_csv(path_in(config.output_dir, fmt::format("ensemble_{}.csv", k)), ens);
    write_momentum_csv(path_in(config.output_dir, fmt::format("mean_momentum_{}.csv", k)), pred.mean_momentum);
    try {
      const Trajectory t = integrate(scenario.mesh0, scenario.curve, pred.mean_momentum, scenario.forward);
      last_mean_curve = t.curves.back();
      write_polygon_csv(path_in(config.output_dir, fmt::format("mean_curve_{}.csv", k)), last_mean_curve);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::forward && e.category() != ErrorCategory::solver) throw;
      last_mean_curve.clear();
      log << fmt::format("warning: mean momentum of iteration {} has no forward solution: {}\n", k, e.describe());
    }
    if (config.record_timing) {
      timing += fmt::format("{},{}\n", k, format_double(d.seconds));
      write_text(path_in(config.output_dir, "timing.csv"), timing);
    }
    note(options, log,
         fmt::format("iteration {}: E={:.6g} R={} S={:.6g} valid={}/{}", k, d.E, opt_to_string(d.R), d.S,
                     d.valid_members, ens.size()));
  };

  const EKIHistory history = run_eki(scenario, target, cfg, p_dagger, observer);
  write_ensemble_csv(path_in(config.output_dir, "final_ensemble.csv"), history.ensembles.back());
  write_momentum_csv(path_in(config.output_dir, "final_mean_momentum.csv"), history.mean_momenta.back());
  if (!last_mean_curve.empty()) write_polygon_csv(path_in(config.output_dir, "final_mean_curve.csv"), last_mean_curve);
  const IterationDiagnostics& d = history.diagnostics.back();
  log << fmt::format("final: E={} R={} S={}\n", format_double(d.E), d.R ? format_double(*d.R) : "-",
                     format_double(d.S));
}

void cmd_report(const RunConfig& config, const Options&, std::ostream& log) {
  const std::string dir = config.output_dir;
  const std::string diag = path_in(dir, "diagnostics.csv");
  std::istringstream in(read_text(diag));
  std::string line;
  if (!std::getline(in, line) || line != "iteration,E,R,S,seconds") throw ParseError(diag + ": unexpected header");
  log << fmt::format("{:>9} {:>14} {:>14} {:>14}\n", "iteration", "E", "R", "S");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) throw ParseError(fmt::format("{}: malformed row '{}'", diag, line));
    log << fmt::format("{:>9} {:>14} {:>14} {:>14}\n", cells[0], cells[1], cells[2].empty() ? "-" : cells[2], cells[3]);
    ++rows;
  }
  if (rows == 0) throw ParseError(diag + ": no data rows");
  for (const char* name : {"template_curve.csv", "target_curve.csv", "final_mean_curve.csv"}) {
    const std::string p = path_in(dir, name);
    if (fs::exists(p)) log << fmt::format("{}: enclosed area {:.6g}\n", name, polygon_area(read_polygon_csv(p)));
  }
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->category()) {
      case ErrorCategory::usage:
        return kExitUsage;
      case ErrorCategory::forward:
        return kExitForward;
      case ErrorCategory::solver:
        return kExitSolver;
      case ErrorCategory::internal:
        return kExitInternal;
    }
  }
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitUsage;
  return kExitInternal;
}

}  // namespace wxreg::app
