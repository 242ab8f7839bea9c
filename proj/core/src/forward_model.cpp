#include "wxreg/forward_model.hpp"

#include "wxreg/errors.hpp"

#include <cmath>
#include <string>

namespace wxreg {

void ForwardConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
  if (steps < 1) throw ConfigError("need at least one time step");
}

Eigen::VectorXd solve_velocity(const Mesh& mesh0, const Mesh& mesh_t, const CurveLoop& curve,
                               std::span<const double> momentum, double alpha, const DofMap& dofs, double* energy) {
  const Eigen::VectorXd b = assemble_curve_rhs(mesh0, mesh_t, curve, momentum, dofs);
  if (b.squaredNorm() == 0.0) {
    if (energy) *energy = 0.0;
    return Eigen::VectorXd::Zero(dofs.num_dofs());
  }
  const SparseOperator K = assemble_scalar_operator(mesh_t, dofs, alpha);
  const SpdSolver solver(K);
  const auto [bx, by] = split_components(b);
  const Eigen::VectorXd ux = solver.solve(bx);
  const Eigen::VectorXd uy = solver.solve(by);
  if (energy) *energy = 0.5 * (ux.dot(K * ux) + uy.dot(K * uy));
  return merge_components(ux, uy);
}

std::vector<Vec2> vertex_velocities(const DofMap& dofs, const Eigen::VectorXd& velocity, int num_vertices) {
  std::vector<Vec2> out(num_vertices);
  for (int v = 0; v < num_vertices; ++v) {
    const int d = dofs.vertex_dof(v, 0);
    out[v] = Vec2(velocity[DofMap::vector_dof(d, 0)], velocity[DofMap::vector_dof(d, 1)]);
  }
  return out;
}

StepResult step(const Mesh& mesh0, const Mesh& mesh_t, const CurveLoop& curve, std::span<const double> momentum,
                const ForwardConfig& cfg) {
  cfg.validate();
  if (!mesh0.shares_topology_with(mesh_t)) throw PreconditionViolation("meshes do not share connectivity");
  const DofMap dofs(mesh_t);
  StepResult r;
  r.velocity = solve_velocity(mesh0, mesh_t, curve, momentum, cfg.alpha, dofs, &r.energy);
  const auto vel = vertex_velocities(dofs, r.velocity, mesh_t.num_vertices());
  r.mesh = displace(mesh_t, vel, cfg.dt());
  return r;
}

Trajectory integrate(const Mesh& mesh0, const CurveLoop& curve, std::span<const double> momentum,
                     const ForwardConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(momentum.size()) != curve.num_facets())
    throw ShapeMismatch("momentum has " + std::to_string(momentum.size()) + " values for " +
                        std::to_string(curve.num_facets()) + " facets");
  Trajectory tr;
  tr.curves.push_back(curve_polygon(mesh0, curve));
  if (cfg.keep_meshes) tr.meshes.push_back(mesh0);
  Mesh current = mesh0;
  for (int k = 0; k < cfg.steps; ++k) {
    try {
      StepResult r = step(mesh0, current, curve, momentum, cfg);
      current = std::move(r.mesh);
      tr.energies.push_back(r.energy);
      if (cfg.keep_velocities) tr.velocities.push_back(std::move(r.velocity));
    } catch (Error& e) {
      e.set_step(k);
      throw;
    }
    tr.curves.push_back(curve_polygon(current, curve));
    if (cfg.keep_meshes) tr.meshes.push_back(current);
  }
  tr.final_mesh = std::move(current);
  return tr;
}

double transport_drift(const Trajectory& trajectory, const Mesh& mesh0, const CurveLoop& curve,
                       std::span<const double> momentum) {
  const auto& meshes = trajectory.meshes;
  if (meshes.size() < 2) throw PreconditionViolation("transport_drift needs the per-step meshes");
  if (static_cast<int>(momentum.size()) != curve.num_facets()) throw ShapeMismatch("momentum length mismatch");
  const int steps = static_cast<int>(meshes.size()) - 1;
  const double dt = 1.0 / steps;
  const MeshTopology& topo = mesh0.topology();

  double worst = 0.0;
  for (int f = 0; f < curve.num_facets(); ++f) {
    const Vec2 p0 = curve.normal0[f] * momentum[f];
    const double scale = p0.norm();
    if (scale == 0.0) continue;
    const auto& cells = topo.edge_cells[curve.edges[f]];
    std::array<Vec2, 2> p{p0, p0};
    for (int k = 0; k < steps; ++k) {
      Vec2 euler = Vec2::Zero(), closed = Vec2::Zero();
      int count = 0;
      for (int s = 0; s < 2; ++s) {
        const int c = cells[s];
        if (c < 0) continue;
        const Mat2 Fk = deformation_gradient(mesh0, meshes[k], c);
        const Mat2 Fk1 = deformation_gradient(mesh0, meshes[k + 1], c);
        const Mat2 grad_u = (Fk1 - Fk) * Fk.inverse() / dt;
        p[s] = p[s] - dt * grad_u.transpose() * p[s];
        euler += p[s];
        closed += Fk1.inverse().transpose() * p0;
        ++count;
      }
      worst = std::max(worst, (euler - closed).norm() / count / scale);
    }
  }
  return worst;
}

ForwardResult evaluate_forward(std::span<const double> momentum, const Scenario& scenario) {
  ForwardConfig cfg = scenario.forward;
  cfg.keep_meshes = false;
  cfg.keep_velocities = false;
  const Trajectory tr = integrate(scenario.mesh0, scenario.curve, momentum, cfg);
  ForwardResult out;
  out.curve = tr.curves.back();
  out.tau = smooth(rasterize_indicator(out.curve, scenario.raster), scenario.smoother);
  return out;
}

RasterField forward_operator(std::span<const double> momentum, const Scenario& scenario) {
  return evaluate_forward(momentum, scenario).tau;
}

}  // namespace wxreg
