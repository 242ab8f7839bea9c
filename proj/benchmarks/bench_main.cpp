#include "wxreg/eki.hpp"
#include "wxreg/fem_assembly.hpp"
#include "wxreg/forward_model.hpp"
#include "wxreg/mesh.hpp"
#include "wxreg/misfit_raster.hpp"
#include "wxreg/momentum.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace wxreg;

const TemplateMesh& template_mesh() {
  static const TemplateMesh t = generate_template_mesh(MeshGenConfig{});
  return t;
}

void BM_GenerateTemplate(benchmark::State& state) {
  MeshGenConfig cfg;
  cfg.h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_template_mesh(cfg));
}
BENCHMARK(BM_GenerateTemplate)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_AssembleOperator(benchmark::State& state) {
  const Mesh& m = template_mesh().mesh;
  const DofMap d(m);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_operator(m, d, 1.0));
  state.counters["dofs"] = d.num_dofs();
}
BENCHMARK(BM_AssembleOperator)->Unit(benchmark::kMillisecond);

void BM_FactorAndSolve(benchmark::State& state) {
  const TemplateMesh& t = template_mesh();
  const DofMap d(t.mesh);
  const SparseOperator A = assemble_operator(t.mesh, d, 1.0);
  const MomentumField p = synthetic_momentum(SyntheticKind::star, t.curve);
  Eigen::VectorXd b = assemble_curve_rhs(t.mesh, t.mesh, t.curve, p, d);
  zero_dofs(b, d.boundary_dofs());
  for (auto _ : state) {
    const SpdSolver s(A);
    benchmark::DoNotOptimize(s.solve(b));
  }
}
BENCHMARK(BM_FactorAndSolve)->Unit(benchmark::kMillisecond);

void BM_ForwardStep(benchmark::State& state) {
  const TemplateMesh& t = template_mesh();
  const MomentumField p = synthetic_momentum(SyntheticKind::contract, t.curve);
  ForwardConfig cfg;
  cfg.alpha = 0.5;
  cfg.steps = 15;
  for (auto _ : state) benchmark::DoNotOptimize(step(t.mesh, t.mesh, t.curve, p, cfg));
}
BENCHMARK(BM_ForwardStep)->Unit(benchmark::kMillisecond);

void BM_Rasterize(benchmark::State& state) {
  const TemplateMesh& t = template_mesh();
  const Polygon poly = curve_polygon(t.mesh, t.curve);
  RasterSpec spec = RasterSpec::from_mesh(t.mesh);
  spec.nx = spec.ny = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_indicator(poly, spec));
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Smooth(benchmark::State& state) {
  const TemplateMesh& t = template_mesh();
  RasterSpec spec = RasterSpec::from_mesh(t.mesh);
  spec.nx = spec.ny = static_cast<int>(state.range(0));
  const RasterField f = rasterize_indicator(curve_polygon(t.mesh, t.curve), spec);
  const Smoother s;
  for (auto _ : state) benchmark::DoNotOptimize(smooth(f, s));
}
BENCHMARK(BM_Smooth)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Analysis(benchmark::State& state) {
  const TemplateMesh& t = template_mesh();
  const int N = static_cast<int>(state.range(0));
  EKIConfig cfg;
  cfg.init_low = -1.0;
  cfg.init_high = 1.0;
  const Ensemble e = init_ensemble(N, t.curve, cfg);
  const RasterSpec spec = RasterSpec::from_mesh(t.mesh);
  std::vector<RasterField> fields;
  for (int j = 0; j < N; ++j) {
    RasterField f(spec);
    for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = e.members[j][k % e.members[j].size()];
    fields.push_back(std::move(f));
  }
  const Prediction p = summarize(e, fields, std::vector<bool>(N, true));
  const RasterField target(spec, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(analysis(e, p, target, cfg.xi));
}
BENCHMARK(BM_Analysis)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
