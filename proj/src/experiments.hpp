#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "dataset.hpp"
#include "estimators.hpp"
#include "linalg.hpp"
#include "shrinkage.hpp"
#include "weights.hpp"

namespace rsc {

// Symmetrized trace discrepancy Tr[V1 V2^{-1} + V1^{-1} V2]; equals 2p iff
// V1 = V2 and diverges when either argument degenerates.
double discrepancy_sym(const SpdMatrix& v1, const SpdMatrix& v2);

// Affine-invariant ||log(V1^{-1/2} V2 V1^{-1/2})||_F.
double discrepancy_logfro(const SpdMatrix& v1, const SpdMatrix& v2);

// sqrt(mean ||tn(V_hat) - tn(truth)||_F^2); both sides rescaled to trace p
// since only the scatter structure is identifiable across estimators.
double rmse(const std::vector<SpdMatrix>& estimates, const SpdMatrix& truth);

enum class Metric { frobenius, logfro };
Metric parse_metric(const std::string& name);

enum class SweepAxis { dimension, alpha, xi, k, t_df };
SweepAxis parse_axis(const std::string& name);
const char* to_string(SweepAxis axis);

// Estimator spec grammar: name[:alpha][@weight]
//   name    one of {scm, tme, lnsmi, sscm, identity, proposed, proposed_raw,
//           kl, renyi}
//   alpha   real or `auto`; only on lnsmi/proposed/proposed_raw/kl/renyi
//   weight  weight spec (see parse_weight); only on tme/proposed/
//           proposed_raw/renyi, default tyler
struct EstimatorSpec {
  std::string name;
  std::string label;  // the spec string as given; CSV `estimator` value
  bool has_alpha = false;
  bool alpha_auto = false;
  double alpha = 0.0;
  std::string weight;  // empty = tyler
};

EstimatorSpec parse_estimator_spec(const std::string& text);
std::vector<EstimatorSpec> parse_estimator_list(const std::string& comma_list);

struct SweepCell {
  double axis_value = 0.0;
  std::string estimator;
  double rmse = 0.0;  // NaN when no trial succeeded
  int trials_ok = 0;
  int trials_failed = 0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::dimension;
  std::vector<double> grid;
  int trials = 0;
  // grid-major, estimators in the order given; size = |grid| * |estimators|.
  std::vector<SweepCell> cells;
};

struct SweepOptions {
  Metric metric = Metric::frobenius;
  bool fixed_sigma = false;  // pin Sigma to the trial-0 draw per grid point
  int bootstrap_replicates = kDefaultBootstrapReplicates;
  M2Source alpha_m2 = M2Source::scm_inverse;
  double epsilon = 1e-6;
  int max_iter = 1000;
};

// Per grid point: re-seed the scenario, draw fresh (Sigma, data) per trial,
// evaluate every estimator on the same draw, aggregate RMSE over the trials
// that produced a usable estimate. Estimator failures are tallied, never
// fatal. trials <= 0 falls back to scn_template.trials.
SweepResult run_sweep(const Scenario& scn_template, SweepAxis axis, const std::vector<double>& grid,
                      const std::vector<EstimatorSpec>& estimators, int trials,
                      const SweepOptions& opt = {});

struct Contamination {
  enum class Kind { zeros, far_cluster };
  Kind kind = Kind::zeros;
  int m = 0;
  double norm = 1e6;  // cluster center distance, far_cluster only

  static Contamination zeros(int m) { return {Kind::zeros, m, 0.0}; }
  static Contamination far_cluster(int m, double norm) { return {Kind::far_cluster, m, norm}; }
};

struct StatusTally {
  SolveStatus status = SolveStatus::converged;
  int count = 0;
  double lambda_max = std::numeric_limits<double>::quiet_NaN();  // worst over the class
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
};

struct BreakdownOptions {
  int trials = 20;
  double epsilon = 1e-6;
  // Collapse near the frontier contracts by ~kappa(1-eps)/p per step, so the
  // default solver budget of 1000 would misreport slow non-existence as
  // max_iter.
  int max_iter = 5000;
};

struct BreakdownReport {
  int n_good = 0;
  int p = 0;
  int m = 0;
  int trials = 0;
  double epsilon_m = 0.0;      // m / (n_good + m)
  double threshold_lo = 0.0;   // 1 - p/kappa - (p-1)/n
  double threshold_hi = 0.0;   // 1 - p/kappa
  std::vector<StatusTally> tallies;  // status enum order, absent classes omitted
  // Max discrepancy_sym(contaminated, clean) over trials where both the
  // contaminated and the clean-data runs converged; NaN when none did.
  double max_discrepancy = std::numeric_limits<double>::quiet_NaN();
};

// Gaussian good data (Sigma = I_p) plus m contaminating points, solved with
// the raw eq10 iteration the breakdown thresholds are stated for.
BreakdownReport breakdown_probe(int n_good, int p, const WeightFunction& wf, double alpha,
                                const Contamination& contamination, std::uint64_t seed,
                                const BreakdownOptions& opt = {});

struct RankedPoint {
  int index = 0;
  double distance = 0.0;  // x^T V^{-1} x
};

// Indices sorted by descending squared Mahalanobis distance, ties by index.
std::vector<RankedPoint> mahalanobis_ranking(const DataSet& x, const SpdMatrix& v);

// CSV emission. Sweeps: axis_value,estimator,rmse,trials_ok,trials_failed.
// Breakdown: epsilon_m,status,count,lambda_max,threshold_lo,threshold_hi with
// one row per status class per report. LF endings, %.12g numbers.
std::string csv_text(const SweepResult& r);
std::string csv_text(const std::vector<BreakdownReport>& reports);
void emit_csv(const SweepResult& r, const std::string& path);
void emit_csv(const BreakdownReport& r, const std::string& path);
void emit_csv(const std::vector<BreakdownReport>& reports, const std::string& path);

struct EvalContext {
  double trace = 0.0;                // identity-baseline scale; <= 0 means p
  std::optional<double> axis_alpha;  // alpha-axis fill for unpinned specs
  int bootstrap_replicates = kDefaultBootstrapReplicates;
  M2Source alpha_m2 = M2Source::scm_inverse;
  std::uint64_t alpha_seed = 1;  // substream for alpha = auto bootstraps
  double epsilon = 1e-6;
  int max_iter = 1000;
};

// One estimator on one dataset; shared by run_sweep and the CLI. Throws on
// structurally invalid requests (unknown name, missing alpha); numerical
// failure comes back in the result status.
EstimatorResult evaluate_estimator(const EstimatorSpec& spec, const DataSet& x,
                                   const EvalContext& ctx);

}  // namespace rsc
