#include "estimators.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace rsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_rows(const DataSet& x) {
  if (x.n() < 1) fail(errc::invalid_input, "estimator requires at least one observation");
}

Matrix scm_matrix(const DataSet& x) {
  const Matrix& r = x.rows();
  Matrix m = (r.transpose() * r) / static_cast<double>(x.n());
  return 0.5 * (m + m.transpose());
}

// s_i = x_i^T A x_i for symmetric A, clamped at zero against rounding.
Vector quad_forms(const Matrix& rows, const Matrix& a) {
  Matrix b = rows * a;
  Vector s = b.cwiseProduct(rows).rowwise().sum();
  return s.cwiseMax(0.0);
}

// Weight evaluations for one sweep of the sample. Families singular at the
// origin hitting s == 0 mark the step degenerate; exact-zero rows are
// rejected before iteration starts, so this only fires once an iterate has
// effectively collapsed and some quadratic form underflowed.
bool eval_weights(const WeightFunction& wf, const Vector& s, Vector& w) {
  w.resize(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= 0.0 && !wf.finite_at_zero()) return false;
    w(i) = wf.w(s(i));
  }
  return true;
}

// (1/n) sum_i w_i x_i x_i^T, symmetrized.
Matrix weighted_scatter(const Matrix& rows, const Vector& w) {
  Matrix wx = w.asDiagonal() * rows;
  Matrix m = (rows.transpose() * wx) / static_cast<double>(rows.rows());
  return 0.5 * (m + m.transpose());
}

// PD inverse via Cholesky. LLT is the per-iteration workhorse; full spectra
// are only taken where a guard needs them.
bool llt_inverse(const Matrix& v, Matrix& out) {
  Eigen::LLT<Matrix> llt(v);
  if (llt.info() != Eigen::Success) return false;
  out = llt.solve(Matrix::Identity(v.rows(), v.cols()));
  return true;
}

Matrix initial_iterate(const DataSet& x, const SolverConfig& cfg) {
  const Eigen::Index p = x.p();
  switch (cfg.init) {
    case InitMode::identity:
      return Matrix::Identity(p, p);
    case InitMode::user: {
      if (!cfg.init_matrix) fail(errc::invalid_argument, "init == user requires init_matrix");
      SpdMatrix v(*cfg.init_matrix);
      if (v.dim() != p) fail(errc::invalid_argument, "init_matrix dimension mismatch");
      if (!v.strictly_pd()) fail(errc::invalid_argument, "init_matrix must be strictly PD");
      return v.mat();
    }
    case InitMode::normalized_scm: {
      Matrix s = scm_matrix(x);
      Vector ev = detail::sym_eigenvalues(s);
      const double lmax = ev(ev.size() - 1);
      // Singular SCM (n < p, replicated rows) falls back to the identity.
      if (!(lmax > 0.0) || ev(0) <= pd_tolerance(lmax)) return Matrix::Identity(p, p);
      return detail::trace_normalize(s);
    }
  }
  fail(errc::invalid_argument, "unknown init mode");
}

void check_alpha01(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    fail(errc::invalid_argument, "alpha must lie in [0, 1]");
}

// One fixed-point update: V -> out. Returns false with a status when the
// update cannot be formed (lost positive definiteness, collapsed trace).
using StepFn = std::function<bool(const Matrix&, Matrix&, SolveStatus&)>;

double step_residual(const StepFn& step, const Matrix& v) {
  Matrix next;
  SolveStatus why = SolveStatus::degenerate_shrinking;
  if (!step(v, next, why) || !next.allFinite()) return kInf;
  const double denom = v.norm();
  if (!(denom > 0.0)) return kInf;
  return (next - v).norm() / denom;
}

void finalize(EstimatorResult& r, const Matrix& v) {
  // Degenerate iterates carry rounding-level negative eigenvalues at worst,
  // which SpdMatrix tolerates; anything beyond that loses the estimate but
  // keeps the status.
  try {
    SpdMatrix est(v);
    r.lambda_max = est.lambda_max();
    r.lambda_min = est.lambda_min();
    r.estimate = std::move(est);
  } catch (const Error&) {
    r.estimate.reset();
  }
}

// Shared iteration driver. Stops on ||V_{k+1} - V_k||_F < epsilon, but only
// reports convergence once the step map is idle at the iterate (relative
// residual <= kResidualTolerance): a collapsing sequence also has vanishing
// consecutive differences, and must run into a guard instead.
EstimatorResult drive(const Matrix& v0, const SolverConfig& cfg, const StepFn& step) {
  EstimatorResult r;
  Matrix v = v0;
  if (cfg.observer) cfg.observer(v);
  SolveStatus stop = SolveStatus::max_iter;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Matrix next;
    SolveStatus why = SolveStatus::degenerate_shrinking;
    if (!step(v, next, why)) {
      r.iterations = k;
      stop = why;
      break;
    }
    r.iterations = k;
    if (!next.allFinite()) {
      stop = SolveStatus::degenerate_exploding;
      break;
    }
    if (cfg.observer) cfg.observer(next);
    Vector ev = detail::sym_eigenvalues(next);
    const double diff = (next - v).norm();
    v = std::move(next);
    if (ev(ev.size() - 1) > kLambdaMaxGuard) {
      stop = SolveStatus::degenerate_exploding;
      break;
    }
    if (ev(0) < kLambdaMinGuard) {
      stop = SolveStatus::degenerate_shrinking;
      break;
    }
    if (diff < cfg.epsilon) {
      const double res = step_residual(step, v);
      if (res <= kResidualTolerance) {
        r.converged = true;
        r.residual = res;
        stop = SolveStatus::converged;
        break;
      }
    }
  }
  r.status = stop;
  if (!r.converged) r.residual = step_residual(step, v);
  finalize(r, v);
  return r;
}

bool reject_zero_rows(const DataSet& x, const WeightFunction& wf, EstimatorResult& r) {
  if (x.zero_row_count() > 0 && !wf.finite_at_zero()) {
    r.status = SolveStatus::invalid_input;
    r.message = "zero rows are not admissible for a weight singular at the origin";
    return true;
  }
  return false;
}

// Raw (un-normalized) fixed point of V = (1/n) sum w(x^T A x) x x^T with
// A = inv_coef * V^{-1} + id_coef * I. Covers the eq10 and eq11 maps.
EstimatorResult raw_variant(const DataSet& x, const WeightFunction& wf, const SolverConfig& cfg,
                            double inv_coef, double id_coef, const char* name) {
  require_rows(x);
  if (cfg.normalize)
    fail(errc::invalid_argument,
         std::string(name) + " iterates without normalization; set cfg.normalize = false");
  EstimatorResult bad;
  if (reject_zero_rows(x, wf, bad)) return bad;
  const Matrix& rows = x.rows();
  const Matrix id = Matrix::Identity(x.p(), x.p());
  StepFn step = [&rows, &wf, inv_coef, id_coef, id](const Matrix& v, Matrix& out,
                                                    SolveStatus& why) {
    Matrix a;
    if (inv_coef != 0.0) {
      Matrix vinv;
      if (!llt_inverse(v, vinv)) {
        why = SolveStatus::degenerate_shrinking;
        return false;
      }
      a = inv_coef * vinv + id_coef * id;
    } else {
      a = id_coef * id;
    }
    Vector s = quad_forms(rows, a);
    Vector w;
    if (!eval_weights(wf, s, w)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    out = weighted_scatter(rows, w);
    return true;
  };
  return drive(initial_iterate(x, cfg), cfg, step);
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::degenerate_shrinking: return "degenerate_shrinking";
    case SolveStatus::degenerate_exploding: return "degenerate_exploding";
    case SolveStatus::invalid_input: return "invalid_input";
  }
  return "unknown";
}

SpdMatrix scm(const DataSet& x) {
  require_rows(x);
  return SpdMatrix(scm_matrix(x));
}

SpdMatrix sscm(const DataSet& x) {
  require_rows(x);
  const Matrix& rows = x.rows();
  Matrix m = Matrix::Zero(x.p(), x.p());
  int used = 0;
  for (Eigen::Index i = 0; i < x.n(); ++i) {
    const double q = rows.row(i).squaredNorm();
    if (q == 0.0) continue;  // zero rows have no direction; skipped, divisor stays n
    m.noalias() += rows.row(i).transpose() * rows.row(i) / q;
    ++used;
  }
  if (used == 0) fail(errc::invalid_input, "all rows are zero");
  m /= static_cast<double>(x.n());
  return SpdMatrix(0.5 * (m + m.transpose()));
}

SpdMatrix gsscm(const DataSet& x, const WeightFunction& wf) {
  require_rows(x);
  const Matrix& rows = x.rows();
  Matrix m = Matrix::Zero(x.p(), x.p());
  int used = 0;
  for (Eigen::Index i = 0; i < x.n(); ++i) {
    const double q = rows.row(i).squaredNorm();
    if (q == 0.0) continue;  // w(0) x x^T = 0 for finite w(0); singular w skips too
    m.noalias() += wf.w(q) * (rows.row(i).transpose() * rows.row(i));
    ++used;
  }
  if (used == 0 && !wf.finite_at_zero()) fail(errc::invalid_input, "all rows are zero");
  m /= static_cast<double>(x.n());
  return SpdMatrix(0.5 * (m + m.transpose()));
}

EstimatorResult m_fixed_point(const DataSet& x, const WeightFunction& wf,
                              const SolverConfig& cfg) {
  require_rows(x);
  if (cfg.alpha != 0.0)
    fail(errc::invalid_argument, "m_fixed_point has no shrinkage; cfg.alpha must be 0");
  EstimatorResult bad;
  if (reject_zero_rows(x, wf, bad)) return bad;
  const Matrix& rows = x.rows();
  const double p = static_cast<double>(x.p());
  const bool normalize = cfg.normalize;
  StepFn step = [&rows, &wf, p, normalize](const Matrix& v, Matrix& out, SolveStatus& why) {
    Matrix vinv;
    if (!llt_inverse(v, vinv)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    Vector s = quad_forms(rows, vinv);
    Vector w;
    if (!eval_weights(wf, s, w)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    out = weighted_scatter(rows, w);
    if (normalize) {
      const double tr = out.trace();
      if (!(tr > 0.0) || !std::isfinite(tr)) {
        why = SolveStatus::degenerate_shrinking;
        return false;
      }
      out *= p / tr;
    }
    return true;
  };
  return drive(initial_iterate(x, cfg), cfg, step);
}

EstimatorResult lnsmi(const DataSet& x, const SolverConfig& cfg) {
  require_rows(x);
  check_alpha01(cfg.alpha);
  const Eigen::Index p = x.p();
  if (cfg.alpha == 1.0) {
    // Full shrinkage: the target itself, data never enters (so zero rows are
    // fine here). The loop converges at the second visit with V = I exactly.
    StepFn step = [p](const Matrix&, Matrix& out, SolveStatus&) {
      out = Matrix::Identity(p, p);
      return true;
    };
    return drive(initial_iterate(x, cfg), cfg, step);
  }
  const WeightFunction wf = WeightFunction::tyler(static_cast<int>(p));
  EstimatorResult bad;
  if (reject_zero_rows(x, wf, bad)) return bad;
  const Matrix& rows = x.rows();
  const double a = cfg.alpha;
  const Matrix id = Matrix::Identity(p, p);
  const double pd = static_cast<double>(p);
  StepFn step = [&rows, wf, a, id, pd](const Matrix& v, Matrix& out, SolveStatus& why) {
    Matrix vinv;
    if (!llt_inverse(v, vinv)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    Vector s = quad_forms(rows, vinv);
    Vector w;
    if (!eval_weights(wf, s, w)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    out = (1.0 - a) * weighted_scatter(rows, w) + a * id;
    const double tr = out.trace();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    out *= pd / tr;
    return true;
  };
  return drive(initial_iterate(x, cfg), cfg, step);
}

EstimatorResult proposed(const DataSet& x, const WeightFunction& wf, const SolverConfig& cfg) {
  require_rows(x);
  check_alpha01(cfg.alpha);
  if (!cfg.normalize)
    fail(errc::invalid_argument, "proposed always trace-normalizes; use proposed_raw");
  EstimatorResult r;
  if (reject_zero_rows(x, wf, r)) return r;
  const Matrix& rows = x.rows();
  const double a = cfg.alpha;
  const Eigen::Index p = x.p();
  const Matrix id = Matrix::Identity(p, p);
  const double pd = static_cast<double>(p);

  if (a == 1.0 && wf.family() == WeightFamily::tyler) {
    // alpha = 1 makes Omega = I independently of V, and the Tyler kernel's
    // fixed point is then the normalized SSCM. Route through sscm() itself so
    // the coincidence is exact rather than within rounding.
    SpdMatrix est = trace_normalize(sscm(x));
    if (cfg.observer) cfg.observer(est.mat());
    r.iterations = 1;
    r.converged = true;
    r.residual = 0.0;
    r.lambda_max = est.lambda_max();
    r.lambda_min = est.lambda_min();
    r.status = SolveStatus::converged;
    r.estimate = std::move(est);
    return r;
  }

  // One three-step update (precision shrinkage, M-step, normalization);
  // doubles as the residual map for the stopping validation.
  auto step3 = [&](const Matrix& v, Matrix& vout, Matrix* omega_out, SolveStatus& why) {
    Matrix vinv;
    if (!llt_inverse(v, vinv)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    Matrix omega = (1.0 - a) * vinv + a * id;
    omega = 0.5 * (omega + omega.transpose());
    Vector s = quad_forms(rows, omega);
    Vector w;
    if (!eval_weights(wf, s, w)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    Matrix m = weighted_scatter(rows, w);
    const double tr = m.trace();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    vout = m * (pd / tr);
    if (omega_out) *omega_out = std::move(omega);
    return true;
  };
  auto residual_at = [&](const Matrix& v) {
    Matrix probe;
    SolveStatus ignore = SolveStatus::degenerate_shrinking;
    if (!step3(v, probe, nullptr, ignore) || !probe.allFinite()) return kInf;
    const double denom = v.norm();
    if (!(denom > 0.0)) return kInf;
    return (probe - v).norm() / denom;
  };

  Matrix v = initial_iterate(x, cfg);
  if (cfg.observer) cfg.observer(v);
  Matrix omega_prev;
  bool have_prev = false;
  SolveStatus stop = SolveStatus::max_iter;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Matrix vn, omega;
    SolveStatus why = SolveStatus::degenerate_shrinking;
    if (!step3(v, vn, &omega, why)) {
      r.iterations = k;
      stop = why;
      break;
    }
    r.iterations = k;
    if (!vn.allFinite()) {
      stop = SolveStatus::degenerate_exploding;
      break;
    }
    if (cfg.observer) cfg.observer(vn);
    Vector ev = detail::sym_eigenvalues(vn);
    const double diff_v = (vn - v).norm();
    // Remark 4: either increment going quiet ends the loop.
    const double diff_o = have_prev ? (omega - omega_prev).norm() : kInf;
    v = std::move(vn);
    omega_prev = std::move(omega);
    have_prev = true;
    if (ev(ev.size() - 1) > kLambdaMaxGuard) {
      stop = SolveStatus::degenerate_exploding;
      break;
    }
    if (ev(0) < kLambdaMinGuard) {
      stop = SolveStatus::degenerate_shrinking;
      break;
    }
    if (std::min(diff_v, diff_o) < cfg.epsilon) {
      const double res = residual_at(v);
      if (res <= kResidualTolerance) {
        r.converged = true;
        r.residual = res;
        stop = SolveStatus::converged;
        break;
      }
    }
  }
  r.status = stop;
  if (!r.converged) r.residual = residual_at(v);
  finalize(r, v);
  return r;
}

EstimatorResult proposed_raw(const DataSet& x, const WeightFunction& wf,
                             const SolverConfig& cfg) {
  check_alpha01(cfg.alpha);
  return raw_variant(x, wf, cfg, 1.0 - cfg.alpha, cfg.alpha, "proposed_raw");
}

EstimatorResult fixed_point_variant_eq10(const DataSet& x, const WeightFunction& wf,
                                         const SolverConfig& cfg) {
  if (cfg.alpha < 0.0) fail(errc::invalid_argument, "alpha must be nonnegative");
  return raw_variant(x, wf, cfg, 1.0, cfg.alpha, "fixed_point_variant_eq10");
}

EstimatorResult fixed_point_kl(const DataSet& x, const SolverConfig& cfg) {
  require_rows(x);
  if (cfg.alpha < 0.0) fail(errc::invalid_argument, "alpha must be nonnegative");
  if (cfg.normalize)
    fail(errc::invalid_argument,
         "fixed_point_kl pins its own scale; set cfg.normalize = false");
  const Eigen::Index p = x.p();
  const WeightFunction wf = WeightFunction::tyler(static_cast<int>(p));
  EstimatorResult bad;
  if (reject_zero_rows(x, wf, bad)) return bad;
  const Matrix& rows = x.rows();
  const double a = cfg.alpha;
  const Matrix id = Matrix::Identity(p, p);
  const double pd = static_cast<double>(p);
  // Tyler's weight gives (p/n) sum x x^T / s; divide by p for the plain
  // 1/s kernel of the KL equation.
  StepFn step = [&rows, wf, a, id, pd](const Matrix& v, Matrix& out, SolveStatus& why) {
    Matrix vinv;
    if (!llt_inverse(v, vinv)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    Vector s = quad_forms(rows, vinv);
    Vector w;
    if (!eval_weights(wf, s, w)) {
      why = SolveStatus::degenerate_shrinking;
      return false;
    }
    out = weighted_scatter(rows, w) / (pd * (1.0 + a)) + (a / (1.0 + a)) * id;
    return true;
  };
  return drive(initial_iterate(x, cfg), cfg, step);
}

EstimatorResult fixed_point_renyi(const DataSet& x, const WeightFunction& wf,
                                  const SolverConfig& cfg) {
  require_rows(x);
  if (!(cfg.alpha > 0.0)) fail(errc::invalid_argument, "renyi iteration requires alpha > 0");
  EstimatorResult r;
  if (reject_zero_rows(x, wf, r)) return r;
  const Matrix& rows = x.rows();
  const double a = cfg.alpha;
  const Eigen::Index p = x.p();
  const Matrix id = Matrix::Identity(p, p);

  // Precision-domain map. For alpha < 1 the identity term is negative, so
  // the iterate can leave the PD cone; guards below translate Omega extremes
  // into V-perspective statuses.
  auto step_omega = [&](const Matrix& om, Matrix& out, SolveStatus& why) {
    Vector s = quad_forms(rows, om);
    Vector w;
    if (!eval_weights(wf, s, w)) {
      why = SolveStatus::degenerate_exploding;
      return false;
    }
    Matrix g = weighted_scatter(rows, w);
    Matrix ginv;
    if (!llt_inverse(g, ginv)) {
      why = SolveStatus::degenerate_shrinking;  // singular scatter: V collapses
      return false;
    }
    out = ginv / a + ((a - 1.0) / a) * id;
    out = 0.5 * (out + out.transpose());
    return true;
  };
  auto residual_at = [&](const Matrix& om) {
    Matrix probe;
    SolveStatus ignore = SolveStatus::max_iter;
    if (!step_omega(om, probe, ignore) || !probe.allFinite()) return kInf;
    const double denom = om.norm();
    if (!(denom > 0.0)) return kInf;
    return (probe - om).norm() / denom;
  };

  Matrix omega;
  {
    Matrix v0 = initial_iterate(x, cfg);
    Matrix v0inv;
    omega = llt_inverse(v0, v0inv) ? v0inv : Matrix(id);
    omega = 0.5 * (omega + omega.transpose());
  }
  if (cfg.observer) cfg.observer(omega);
  SolveStatus stop = SolveStatus::max_iter;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Matrix next;
    SolveStatus why = SolveStatus::degenerate_shrinking;
    if (!step_omega(omega, next, why)) {
      r.iterations = k;
      stop = why;
      break;
    }
    r.iterations = k;
    if (!next.allFinite()) {
      stop = SolveStatus::degenerate_shrinking;  // Omega blew up, V underflows
      break;
    }
    if (cfg.observer) cfg.observer(next);
    Vector ev = detail::sym_eigenvalues(next);
    const double diff = (next - omega).norm();
    omega = std::move(next);
    if (ev(0) < kLambdaMinGuard) {
      stop = SolveStatus::degenerate_exploding;  // lambda_min(Omega) -> 0: V explodes
      break;
    }
    if (ev(ev.size() - 1) > kLambdaMaxGuard) {
      stop = SolveStatus::degenerate_shrinking;
      break;
    }
    if (diff < cfg.epsilon) {
      const double res = residual_at(omega);
      if (res <= kResidualTolerance) {
        r.converged = true;
        r.residual = res;
        stop = SolveStatus::converged;
        break;
      }
    }
  }
  r.status = stop;
  if (!r.converged) r.residual = residual_at(omega);
  // Report in the scatter domain: V = Omega^{-1}.
  try {
    SpdMatrix om(omega);
    SpdMatrix v = spd_inverse(om);
    r.lambda_max = v.lambda_max();
    r.lambda_min = v.lambda_min();
    r.estimate = std::move(v);
  } catch (const Error&) {
    r.estimate.reset();
  }
  return r;
}

SpdMatrix em_precision(const DataSet& x, double beta, double alpha) {
  require_rows(x);
  if (!(beta > 0.0)) fail(errc::invalid_argument, "beta must be positive");
  if (alpha < 0.0) fail(errc::invalid_argument, "alpha must be nonnegative");
  SpdMatrix s(scm_matrix(x));
  SpdMatrix sinv = spd_inverse(s);  // errc::singular when the SCM is rank-deficient
  Matrix om = beta * sinv.mat() + alpha * Matrix::Identity(x.p(), x.p());
  return SpdMatrix(std::move(om));
}

double equation_residual(const DataSet& x, const SpdMatrix& v, const WeightFunction& wf,
                         double alpha, EstEq which) {
  require_rows(x);
  if (v.dim() != x.p()) fail(errc::invalid_argument, "dimension mismatch");
  const bool inverse_kernel = which == EstEq::eq6 || !wf.finite_at_zero();
  if (x.zero_row_count() > 0 && inverse_kernel)
    fail(errc::invalid_input, "zero rows are not admissible for a 1/s kernel");
  if (which != EstEq::eq4 && alpha < 0.0)
    fail(errc::invalid_argument, "alpha must be nonnegative");
  if (which == EstEq::eq11 && alpha > 1.0)
    fail(errc::invalid_argument, "eq11 requires alpha in [0, 1]");

  // Tyler solutions carry no scale; pin Tr = p before measuring.
  Matrix vm = (which == EstEq::eq4 && wf.family() == WeightFamily::tyler)
                  ? detail::trace_normalize(v.mat())
                  : v.mat();
  const double denom = vm.norm();
  if (!(denom > 0.0)) fail(errc::invalid_input, "zero matrix has no residual");
  const Matrix& rows = x.rows();
  const Eigen::Index p = x.p();
  const Matrix id = Matrix::Identity(p, p);
  Matrix vinv = spd_inverse(SpdMatrix(vm)).mat();

  Matrix rhs;
  switch (which) {
    case EstEq::eq4:
    case EstEq::eq5: {
      Vector s = quad_forms(rows, vinv);
      Vector w;
      if (!eval_weights(wf, s, w)) fail(errc::invalid_input, "quadratic form vanished");
      rhs = weighted_scatter(rows, w);
      if (which == EstEq::eq5) rhs += alpha * id;
      break;
    }
    case EstEq::eq6: {
      Vector s = quad_forms(rows, vinv);
      Vector w(s.size());
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (!(s(i) > 0.0)) fail(errc::invalid_input, "quadratic form vanished");
        w(i) = 1.0 / s(i);
      }
      rhs = weighted_scatter(rows, w) / (1.0 + alpha) + (alpha / (1.0 + alpha)) * id;
      break;
    }
    case EstEq::eq10:
    case EstEq::eq11: {
      const double c = which == EstEq::eq10 ? 1.0 : 1.0 - alpha;
      Matrix a = c * vinv + alpha * id;
      Vector s = quad_forms(rows, a);
      Vector w;
      if (!eval_weights(wf, s, w)) fail(errc::invalid_input, "quadratic form vanished");
      rhs = weighted_scatter(rows, w);
      break;
    }
  }
  return (vm - rhs).norm() / denom;
}

namespace {

// Orthonormal basis of the span of the selected rows; dependent rows drop
// out, so the result can have fewer columns than requested.
Matrix subset_basis(const Matrix& rows, const std::vector<int>& idx) {
  const Eigen::Index p = rows.cols();
  Matrix b(p, static_cast<Eigen::Index>(idx.size()));
  Eigen::Index r = 0;
  for (int i : idx) {
    Vector u = rows.row(i).transpose();
    const double scale = u.norm();
    for (Eigen::Index j = 0; j < r; ++j) u -= b.col(j).dot(u) * b.col(j);
    const double nn = u.norm();
    if (nn > 1e-12 * std::max(1.0, scale)) b.col(r++) = u / nn;
  }
  return b.leftCols(r);
}

double subspace_fraction(const Matrix& rows, const Matrix& basis) {
  int in = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Vector xr = rows.row(i).transpose();
    const double resid = (xr - basis * (basis.transpose() * xr)).norm();
    if (resid <= 1e-9 * std::max(1.0, xr.norm())) ++in;
  }
  return static_cast<double>(in) / static_cast<double>(rows.rows());
}

}  // namespace

ConditionFReport condition_f_diagnostic(const DataSet& x, double kappa) {
  require_rows(x);
  if (!(kappa > 0.0)) fail(errc::invalid_argument, "kappa must be positive");
  const Eigen::Index n = x.n();
  const Eigen::Index p = x.p();
  ConditionFReport rep;
  rep.bound = 1.0 - static_cast<double>(p) / kappa;
  rep.zero_fraction = static_cast<double>(x.zero_row_count()) / static_cast<double>(n);
  rep.zero_ok = rep.zero_fraction < rep.bound;

  const Matrix& rows = x.rows();
  std::vector<int> nz;
  for (Eigen::Index i = 0; i < n; ++i)
    if (rows.row(i).squaredNorm() > 0.0) nz.push_back(static_cast<int>(i));

  const int k = static_cast<int>(p) - 1;
  double worst = rep.zero_fraction;  // the origin sits inside every subspace
  if (k == 0 || nz.empty()) {
    rep.exact_search = true;
  } else if (static_cast<int>(nz.size()) <= k) {
    // Fewer spanning rows than p-1: a single candidate span covers them all.
    rep.exact_search = true;
    worst = std::max(worst, subspace_fraction(rows, subset_basis(rows, nz)));
  } else {
    double combos = 1.0;
    for (int i = 0; i < k; ++i) combos *= static_cast<double>(nz.size() - i) / (i + 1);
    constexpr double kExactCap = 200000.0;
    if (combos <= kExactCap) {
      rep.exact_search = true;
      std::vector<int> pick(k);
      for (int i = 0; i < k; ++i) pick[i] = i;
      while (true) {
        std::vector<int> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = nz[pick[i]];
        worst = std::max(worst, subspace_fraction(rows, subset_basis(rows, idx)));
        int pos = k - 1;
        while (pos >= 0 && pick[pos] == static_cast<int>(nz.size()) - k + pos) --pos;
        if (pos < 0) break;
        ++pick[pos];
        for (int i = pos + 1; i < k; ++i) pick[i] = pick[i - 1] + 1;
      }
    } else {
      rep.exact_search = false;
      std::mt19937_64 gen = substream(0x51d5u, static_cast<std::uint64_t>(n),
                                      static_cast<std::uint64_t>(p));
      constexpr int kSamples = 2000;
      for (int b = 0; b < kSamples; ++b) {
        std::vector<int> idx;
        std::sample(nz.begin(), nz.end(), std::back_inserter(idx), k, gen);
        worst = std::max(worst, subspace_fraction(rows, subset_basis(rows, idx)));
      }
    }
  }
  rep.max_subspace_fraction = worst;
  rep.subspace_ok = rep.max_subspace_fraction < rep.bound;
  return rep;
}

}  // namespace rsc
