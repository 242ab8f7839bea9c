#pragma once

#include "wxreg/eki.hpp"
#include "wxreg/forward_model.hpp"
#include "wxreg/mesh.hpp"
#include "wxreg/misfit_raster.hpp"
#include "wxreg/momentum.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace wxreg::app {

struct MeshSection {
  MeshGenConfig generator;
  /// Load this MSH file instead of generating a mesh.
  std::optional<std::string> msh_path;
  int curve_tag = 1;
};

struct ForwardSection {
  double alpha = 1.0;
  int steps = 10;
};

struct RasterSection {
  int nx = 128;
  int ny = 128;
  double kappa = 10.0;
  double tolerance = 1e-8;
};

struct EKISection {
  int ensemble_size = 20;
  double xi = 1e-3;
  int max_iterations = 5;
  std::optional<double> misfit_tolerance;
  std::optional<double> consensus_tolerance;
  double init_low = -25.0;
  double init_high = 25.0;
};

/// Everything a run depends on. Serialized to config.json in every run
/// directory; re-running from that file reproduces the outputs.
struct RunConfig {
  std::optional<SyntheticKind> scenario;
  MeshSection mesh;
  ForwardSection target{0.5, 15};     // target generation
  ForwardSection inversion{1.0, 10};  // forward model inside EKI
  ForwardSection forward{0.5, 15};    // the forward subcommand
  RasterSection raster;
  EKISection eki;
  std::uint64_t seed = 0;
  std::string output_dir = "run";
  /// Directory holding make-target outputs; defaults to output_dir.
  std::optional<std::string> target_dir;
  /// Momentum CSV for the forward subcommand.
  std::optional<std::string> momentum_file;
  /// Also write wall-clock seconds into diagnostics.csv (breaks byte-identical reruns).
  bool record_timing = false;

  /// Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
/// Fully resolved JSON, all defaults spelled out.
std::string dump_config(const RunConfig& config);

struct Options {
  int jobs = 0;        // worker threads for ensemble prediction, 0 = all cores
  bool quiet = false;  // suppress progress messages
};

/// Template mesh and curve for the configured mesh section.
TemplateMesh build_template(const RunConfig& config);

Scenario make_scenario(const RunConfig& config, const TemplateMesh& tmpl, const ForwardSection& forward);

void cmd_mesh_gen(const RunConfig& config, const Options& options, std::ostream& log);
void cmd_make_target(const RunConfig& config, const Options& options, std::ostream& log);
void cmd_forward(const RunConfig& config, const Options& options, std::ostream& log);
void cmd_invert(const RunConfig& config, const Options& options, std::ostream& log);
void cmd_report(const RunConfig& config, const Options& options, std::ostream& log);

/// Process exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitForward = 3;
inline constexpr int kExitSolver = 4;

}  // namespace wxreg::app
