#pragma once

#include "wxreg/fem_assembly.hpp"
#include "wxreg/mesh.hpp"
#include "wxreg/misfit_raster.hpp"
#include "wxreg/momentum.hpp"

#include <optional>
#include <span>
#include <vector>

namespace wxreg {

struct ForwardConfig {
  double alpha = 1.0;
  int steps = 10;  // T; dt = 1 / T
  /// Keep every intermediate mesh (needed by transport_drift).
  bool keep_meshes = false;
  /// Keep the velocity DOFs of every step.
  bool keep_velocities = false;

  double dt() const { return 1.0 / steps; }
  /// Throws ConfigError.
  void validate() const;
};

struct Trajectory {
  /// Curve polygon at every step, T + 1 entries including t = 0.
  std::vector<Polygon> curves;
  /// 0.5 * a(u_k, u_k) for k = 0..T-1.
  std::vector<double> energies;
  /// Meshes at every step when requested (T + 1 entries).
  std::vector<Mesh> meshes;
  /// Interleaved velocity DOFs per step when requested.
  std::vector<Eigen::VectorXd> velocities;
  Mesh final_mesh;
};

struct StepResult {
  Mesh mesh;                 // mesh at the next step
  Eigen::VectorXd velocity;  // interleaved velocity DOFs on the current mesh
  double energy = 0.0;       // 0.5 * a(u, u)
};

/// Velocity DOFs of the momentum equation on mesh_t.
Eigen::VectorXd solve_velocity(const Mesh& mesh0, const Mesh& mesh_t, const CurveLoop& curve,
                               std::span<const double> momentum, double alpha, const DofMap& dofs,
                               double* energy = nullptr);

/// Vertex velocities read from the point-value DOFs.
std::vector<Vec2> vertex_velocities(const DofMap& dofs, const Eigen::VectorXd& velocity, int num_vertices);

/// One explicit Euler step of the flow.
StepResult step(const Mesh& mesh0, const Mesh& mesh_t, const CurveLoop& curve, std::span<const double> momentum,
                const ForwardConfig& cfg);

/// T steps from the template. Errors carry the failing step index.
Trajectory integrate(const Mesh& mesh0, const CurveLoop& curve, std::span<const double> momentum,
                     const ForwardConfig& cfg);

/// Largest relative gap, over facets and steps, between the curve momentum
/// obtained by Euler-integrating p' = -(grad u)^T p with the mesh-motion
/// gradient of each cell and the closed form F^{-T} p0 (both averaged over
/// the two cells next to the facet). Requires meshes in the trajectory.
double transport_drift(const Trajectory& trajectory, const Mesh& mesh0, const CurveLoop& curve,
                       std::span<const double> momentum);

/// Everything a forward evaluation depends on.
struct Scenario {
  Mesh mesh0;
  CurveLoop curve;
  ForwardConfig forward;
  RasterSpec raster;
  Smoother smoother;
};

struct ForwardResult {
  Polygon curve;    // time-1 curve
  RasterField tau;  // smoothed indicator of its interior
};

ForwardResult evaluate_forward(std::span<const double> momentum, const Scenario& scenario);

/// p -> smoothed indicator of the time-1 curve.
RasterField forward_operator(std::span<const double> momentum, const Scenario& scenario);

}  // namespace wxreg
