#pragma once

#include <functional>
#include <optional>
#include <string>

#include "dataset.hpp"
#include "linalg.hpp"
#include "weights.hpp"

namespace rsc {

enum class SolveStatus {
  converged,
  max_iter,
  degenerate_shrinking,   // lambda_min collapsed toward 0
  degenerate_exploding,   // lambda_max diverged (raw mode)
  invalid_input,
};

const char* to_string(SolveStatus s);

enum class InitMode { normalized_scm, identity, user };

struct SolverConfig {
  double alpha = 0.0;    // shrinkage coefficient in [0,1]
  double epsilon = 1e-6; // Remark 4 stopping tolerance
  int max_iter = 1000;
  InitMode init = InitMode::normalized_scm;
  std::optional<Matrix> init_matrix;  // used when init == user; must be PD
  bool normalize = true;              // trace normalization each iteration
  // Diagnostics hook: receives V0 and every accepted iterate (after
  // normalization where applicable).
  std::function<void(const Matrix&)> observer;
};

// converged requires the governing-equation residual to be at or below this.
constexpr double kResidualTolerance = 1e-5;

// Raw-mode divergence guards: the machine-detectable no-solution escapes.
constexpr double kLambdaMaxGuard = 1e12;
constexpr double kLambdaMinGuard = 1e-12;

struct EstimatorResult {
  std::optional<SpdMatrix> estimate;  // absent when status == invalid_input
  int iterations = 0;
  bool converged = false;
  // Relative Frobenius residual of the governing equation (raw modes) or of
  // the estimator's own iteration map (normalized modes).
  double residual = std::numeric_limits<double>::quiet_NaN();
  double lambda_max = std::numeric_limits<double>::quiet_NaN();
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  SolveStatus status = SolveStatus::invalid_input;
  std::string message;
};

SpdMatrix scm(const DataSet& x);
// Zero rows contribute nothing and are skipped (count available from the
// dataset); the divisor stays n. All-zero input is invalid.
SpdMatrix sscm(const DataSet& x);
SpdMatrix gsscm(const DataSet& x, const WeightFunction& wf);

// eq4 fixed point; with wf = tyler this is TME. cfg.alpha must be 0.
EstimatorResult m_fixed_point(const DataSet& x, const WeightFunction& wf, const SolverConfig& cfg);

// Convex-combination shrinkage of the covariance structure toward I_p with
// per-step trace normalization; alpha = 0 is TME, alpha = 1 returns I_p.
EstimatorResult lnsmi(const DataSet& x, const SolverConfig& cfg);

// Three-step update (precision shrinkage, M-step, trace normalization)
// with the min{dOmega, dV} stopping rule.
EstimatorResult proposed(const DataSet& x, const WeightFunction& wf, const SolverConfig& cfg);

// Un-normalized fixed point of the eq11 map; cfg.normalize must be false.
EstimatorResult proposed_raw(const DataSet& x, const WeightFunction& wf, const SolverConfig& cfg);

// Un-normalized fixed point of the eq10 map, the equation the breakdown
// thresholds are stated for; cfg.normalize must be false.
EstimatorResult fixed_point_variant_eq10(const DataSet& x, const WeightFunction& wf,
                                         const SolverConfig& cfg);

// KL-penalized estimating equation (eq6) by direct fixed-point iteration.
EstimatorResult fixed_point_kl(const DataSet& x, const SolverConfig& cfg);

// Renyi-penalized fixed point in the precision domain; returns V = Omega^{-1}.
// Requires cfg.alpha > 0.
EstimatorResult fixed_point_renyi(const DataSet& x, const WeightFunction& wf,
                                  const SolverConfig& cfg);

// Ridge shrinkage of the precision matrix: Omega-hat = beta*S^{-1} + alpha*I.
SpdMatrix em_precision(const DataSet& x, double beta, double alpha);

enum class EstEq { eq4, eq5, eq6, eq10, eq11 };

// Relative Frobenius residual ||V - RHS(V)||_F / ||V||_F of the selected
// estimating equation. For the Tyler weight under eq4 the residual is
// evaluated after rescaling V to trace p (Tyler solutions carry no scale).
// eq6 uses the printed 1/s kernel and ignores wf.
double equation_residual(const DataSet& x, const SpdMatrix& v, const WeightFunction& wf,
                         double alpha, EstEq which);

struct ConditionFReport {
  double zero_fraction = 0.0;
  double max_subspace_fraction = 0.0;
  double bound = 0.0;  // 1 - p/kappa, shared by both checks
  bool zero_ok = false;
  bool subspace_ok = false;
  bool exact_search = false;  // exhaustive subset enumeration vs sampling
};

ConditionFReport condition_f_diagnostic(const DataSet& x, double kappa);

}  // namespace rsc
