#pragma once

#include "wxreg/forward_model.hpp"
#include "wxreg/misfit_raster.hpp"
#include "wxreg/momentum.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wxreg {

struct EKIConfig {
  int ensemble_size = 20;
  double xi = 1e-3;
  int max_iterations = 5;
  std::optional<double> misfit_tolerance;
  std::optional<double> consensus_tolerance;
  std::uint64_t seed = 0;
  double init_low = -25.0;
  double init_high = 25.0;
  /// Worker threads for the prediction step; 0 picks the hardware count.
  int jobs = 0;

  /// Throws ConfigError.
  void validate() const;
};

struct Ensemble {
  std::vector<MomentumField> members;
  /// False for members whose last forward evaluation failed.
  std::vector<bool> valid;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(members.size()); }
};

/// Facet coefficients i.i.d. uniform on [init_low, init_high] from a
/// mt19937_64 seeded with cfg.seed.
Ensemble init_ensemble(int N, const CurveLoop& curve, const EKIConfig& cfg);

struct Prediction {
  /// Smoothed indicators of each member; empty for failed members.
  std::vector<RasterField> fields;
  /// Time-1 curves of each member; empty for failed members.
  std::vector<Polygon> curves;
  std::vector<bool> valid;
  /// Error message per failed member.
  std::vector<std::string> failures;
  RasterField mean_field;        // q bar over valid members
  MomentumField mean_momentum;   // p bar over valid members

  int num_valid() const;
};

/// Forward evaluation function used by predict; defaults to evaluate_forward.
using ForwardFunction = std::function<ForwardResult(const MomentumField&)>;

/// Runs the forward model for every member on `jobs` threads. Members whose
/// evaluation raises a forward or solver error are marked invalid. Throws
/// AllMembersFailed when fewer than two members remain.
Prediction predict(const Ensemble& ensemble, const ForwardFunction& forward, int jobs);
Prediction predict(const Ensemble& ensemble, const Scenario& scenario, int jobs);

/// Means over the valid entries, in member order.
Prediction summarize(const Ensemble& ensemble, std::vector<RasterField> fields, std::vector<bool> valid);

/// Kalman update of every valid member,
///   p_j += Cov_PQ (Cov_QQ + xi I)^{-1} (q_target - tau_j),
/// evaluated in ensemble space:
///   p_j += 1/(n-1) sum_i B_i [(G + xi I)^{-1} s_j]_i,
///   s_j = <A_i, r_j>, G_ik = <A_i, A_k> / (n-1).
/// Invalid members are left unchanged. Throws SingularGram.
Ensemble analysis(const Ensemble& ensemble, const Prediction& prediction, const RasterField& target, double xi);

struct IterationDiagnostics {
  int iteration = 0;
  double E = 0.0;
  std::optional<double> R;
  double S = 0.0;
  double seconds = 0.0;
  int valid_members = 0;
};

/// E = ||q_target - q bar||^2, R = ||p bar - p_dagger|| / ||p_dagger||,
/// S = mean_j ||p_j - p bar|| over valid members, curve-weighted norms.
IterationDiagnostics diagnostics(const Ensemble& ensemble, const Prediction& prediction, const RasterField& target,
                                 const CurveLoop& curve, const std::optional<MomentumField>& p_dagger);

struct EKIHistory {
  std::vector<IterationDiagnostics> diagnostics;
  /// Ensemble used for the prediction of each iteration.
  std::vector<Ensemble> ensembles;
  std::vector<MomentumField> mean_momenta;
  bool stopped_by_tolerance = false;
};

/// Called after the diagnostics of every iteration, before the analysis.
using EKIObserver =
    std::function<void(int iteration, const Ensemble&, const Prediction&, const IterationDiagnostics&)>;

/// predict -> diagnostics -> stop check -> analysis, for iterations
/// 0..max_iterations (the last one is not followed by an analysis).
EKIHistory run_eki(const Scenario& scenario, const RasterField& target, const EKIConfig& cfg,
                   const std::optional<MomentumField>& p_dagger = std::nullopt, const EKIObserver& observer = {});

/// Same loop with a custom forward function (used by tests).
EKIHistory run_eki(const CurveLoop& curve, const ForwardFunction& forward, const RasterField& target,
                   const EKIConfig& cfg, const std::optional<MomentumField>& p_dagger = std::nullopt,
                   const EKIObserver& observer = {});

}  // namespace wxreg
