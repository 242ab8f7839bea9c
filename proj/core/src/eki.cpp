#include "wxreg/eki.hpp"

#include "wxreg/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <thread>

namespace wxreg {

namespace {
constexpr double kMaxGramCondition = 1e14;

// Valid members sorted by their coefficients, so that every reduction over
// the ensemble runs in the same order whatever the member labels are.
std::vector<int> canonical_order(const Ensemble& ensemble, const std::vector<bool>& valid) {
  std::vector<int> idx;
  for (int j = 0; j < ensemble.size(); ++j)
    if (valid[j]) idx.push_back(j);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const auto& x = ensemble.members[a];
    const auto& y = ensemble.members[b];
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  });
  return idx;
}
}  // namespace

void EKIConfig::validate() const {
  if (ensemble_size < 2) throw ConfigError("ensemble needs at least 2 members");
  if (!(xi > 0.0) || !std::isfinite(xi)) throw ConfigError("xi must be positive");
  if (max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
  if (!std::isfinite(init_low) || !std::isfinite(init_high) || init_low > init_high)
    throw ConfigError("invalid initial range");
  if (misfit_tolerance && !(*misfit_tolerance >= 0.0)) throw ConfigError("misfit tolerance must be nonnegative");
  if (consensus_tolerance && !(*consensus_tolerance >= 0.0)) throw ConfigError("consensus tolerance must be nonnegative");
  if (jobs < 0) throw ConfigError("jobs must be nonnegative");
}

Ensemble init_ensemble(int N, const CurveLoop& curve, const EKIConfig& cfg) {
  if (N < 2) throw PreconditionViolation("ensemble needs at least 2 members");
  Ensemble ens;
  ens.seed = cfg.seed;
  ens.members.assign(N, MomentumField(curve.num_facets(), 0.0));
  ens.valid.assign(N, true);
  if (cfg.init_low == cfg.init_high) {
    for (auto& m : ens.members) std::fill(m.begin(), m.end(), cfg.init_low);
    return ens;
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(cfg.init_low, cfg.init_high);
  for (auto& m : ens.members)
    for (double& v : m) v = dist(rng);
  return ens;
}

int Prediction::num_valid() const { return static_cast<int>(std::count(valid.begin(), valid.end(), true)); }

Prediction summarize(const Ensemble& ensemble, std::vector<RasterField> fields, std::vector<bool> valid) {
  Prediction p;
  p.fields = std::move(fields);
  p.valid = std::move(valid);
  p.failures.resize(p.valid.size());
  const int n = p.num_valid();
  if (n < 2) throw AllMembersFailed(std::to_string(n) + " valid member(s) left, need 2");
  const int nf = static_cast<int>(ensemble.members.front().size());
  p.mean_momentum.assign(nf, 0.0);
  const std::vector<int> order = canonical_order(ensemble, p.valid);
  p.mean_field = RasterField(p.fields[order.front()].spec);
  for (int j : order) {
    for (std::size_t k = 0; k < p.mean_field.values.size(); ++k) p.mean_field.values[k] += p.fields[j].values[k];
    for (int f = 0; f < nf; ++f) p.mean_momentum[f] += ensemble.members[j][f];
  }
  for (double& v : p.mean_field.values) v /= n;
  for (double& v : p.mean_momentum) v /= n;
  return p;
}

Prediction predict(const Ensemble& ensemble, const ForwardFunction& forward, int jobs) {
  const int N = ensemble.size();
  std::vector<RasterField> fields(N);
  std::vector<Polygon> curves(N);
  std::vector<std::string> failures(N);
  std::vector<char> ok(N, 0);
  std::vector<std::exception_ptr> fatal(N);

  auto work = [&](int j) {
    try {
      ForwardResult r = forward(ensemble.members[j]);
      fields[j] = std::move(r.tau);
      curves[j] = std::move(r.curve);
      ok[j] = 1;
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::forward || e.category() == ErrorCategory::solver)
        failures[j] = e.describe();
      else
        fatal[j] = std::current_exception();
    } catch (...) {
      fatal[j] = std::current_exception();
    }
  };

  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, N);
  if (jobs <= 1) {
    for (int j = 0; j < N; ++j) work(j);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (int j = next++; j < N; j = next++) work(j);
      });
    for (auto& th : pool) th.join();
  }
  for (int j = 0; j < N; ++j)
    if (fatal[j]) std::rethrow_exception(fatal[j]);

  std::vector<bool> valid(ok.begin(), ok.end());
  Prediction p = summarize(ensemble, std::move(fields), std::move(valid));
  p.curves = std::move(curves);
  p.failures = std::move(failures);
  return p;
}

Prediction predict(const Ensemble& ensemble, const Scenario& scenario, int jobs) {
  return predict(ensemble, [&scenario](const MomentumField& m) { return evaluate_forward(m, scenario); }, jobs);
}

Ensemble analysis(const Ensemble& ensemble, const Prediction& prediction, const RasterField& target, double xi) {
  if (!(xi > 0.0)) throw PreconditionViolation("xi must be positive");
  const std::vector<int> idx = canonical_order(ensemble, prediction.valid);
  const int n = static_cast<int>(idx.size());
  if (n < 2) throw AllMembersFailed("analysis needs at least 2 valid members");

  const RasterField& qbar = prediction.mean_field;
  const double w = qbar.spec.weight();
  const std::size_t m = qbar.values.size();
  if (!(target.spec == qbar.spec)) throw ShapeMismatch("target raster does not match the predictions");

  // Anomalies, one column per valid member.
  Eigen::MatrixXd A(m, n);
  for (int a = 0; a < n; ++a)
    for (std::size_t k = 0; k < m; ++k) A(k, a) = prediction.fields[idx[a]].values[k] - qbar.values[k];
  const int nf = static_cast<int>(prediction.mean_momentum.size());
  Eigen::MatrixXd B(nf, n);
  for (int a = 0; a < n; ++a)
    for (int f = 0; f < nf; ++f) B(f, a) = ensemble.members[idx[a]][f] - prediction.mean_momentum[f];

  const Eigen::MatrixXd G = w * (A.transpose() * A) / (n - 1);
  const Eigen::MatrixXd H = G + xi * Eigen::MatrixXd::Identity(n, n);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  const double lmin = eig.eigenvalues().minCoeff(), lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > kMaxGramCondition)
    throw SingularGram("ensemble Gram matrix condition number " + std::to_string(lmax / lmin));

  // Residuals r_j = q_target - tau_j projected on the anomalies.
  Eigen::MatrixXd S(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd r(m);
    for (std::size_t k = 0; k < m; ++k) r[k] = target.values[k] - prediction.fields[idx[j]].values[k];
    S.col(j) = w * (A.transpose() * r);
  }
  const Eigen::MatrixXd Y = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                            eig.eigenvectors().transpose() * S;
  const Eigen::MatrixXd dP = B * Y / (n - 1);

  Ensemble out = ensemble;
  for (int j = 0; j < n; ++j)
    for (int f = 0; f < nf; ++f) out.members[idx[j]][f] += dP(f, j);
  for (int j = 0; j < out.size(); ++j) out.valid[j] = true;
  return out;
}

IterationDiagnostics diagnostics(const Ensemble& ensemble, const Prediction& prediction, const RasterField& target,
                                 const CurveLoop& curve, const std::optional<MomentumField>& p_dagger) {
  IterationDiagnostics d;
  RasterField diff = target;
  for (std::size_t k = 0; k < diff.values.size(); ++k) diff.values[k] -= prediction.mean_field.values[k];
  d.E = l2_inner(diff, diff);
  const MomentumField& pbar = prediction.mean_momentum;
  if (p_dagger) {
    MomentumField e(pbar.size());
    for (std::size_t f = 0; f < e.size(); ++f) e[f] = pbar[f] - (*p_dagger)[f];
    d.R = momentum_norm(e, curve) / momentum_norm(*p_dagger, curve);
  }
  double s = 0.0;
  int n = 0;
  MomentumField e(pbar.size());
  for (int j = 0; j < ensemble.size(); ++j) {
    if (!prediction.valid[j]) continue;
    for (std::size_t f = 0; f < e.size(); ++f) e[f] = ensemble.members[j][f] - pbar[f];
    s += momentum_norm(e, curve);
    ++n;
  }
  d.S = n > 0 ? s / n : 0.0;
  d.valid_members = n;
  return d;
}

EKIHistory run_eki(const CurveLoop& curve, const ForwardFunction& forward, const RasterField& target,
                   const EKIConfig& cfg, const std::optional<MomentumField>& p_dagger, const EKIObserver& observer) {
  cfg.validate();
  EKIHistory history;
  Ensemble ens = init_ensemble(cfg.ensemble_size, curve, cfg);
  for (int k = 0; k <= cfg.max_iterations; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const Prediction pred = predict(ens, forward, cfg.jobs);
    ens.valid = pred.valid;
    IterationDiagnostics d = diagnostics(ens, pred, target, curve, p_dagger);
    d.iteration = k;
    d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.diagnostics.push_back(d);
    history.ensembles.push_back(ens);
    history.mean_momenta.push_back(pred.mean_momentum);
    if (observer) observer(k, ens, pred, d);

    const bool converged = (cfg.misfit_tolerance && d.E <= *cfg.misfit_tolerance) ||
                           (cfg.consensus_tolerance && d.S <= *cfg.consensus_tolerance);
    if (converged) history.stopped_by_tolerance = true;
    if (converged || k == cfg.max_iterations) break;
    ens = analysis(ens, pred, target, cfg.xi);
  }
  return history;
}

EKIHistory run_eki(const Scenario& scenario, const RasterField& target, const EKIConfig& cfg,
                   const std::optional<MomentumField>& p_dagger, const EKIObserver& observer) {
  return run_eki(
      scenario.curve, [&scenario](const MomentumField& m) { return evaluate_forward(m, scenario); }, target, cfg,
      p_dagger, observer);
}

}  // namespace wxreg
