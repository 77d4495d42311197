#include "experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <utility>

#include "errors.hpp"
#include "rng.hpp"

namespace rsc {

double discrepancy_sym(const SpdMatrix& v1, const SpdMatrix& v2) {
  if (v1.dim() != v2.dim()) fail(errc::invalid_argument, "dimension mismatch");
  const Matrix a = spd_inverse(v2).mat();
  const Matrix b = spd_inverse(v1).mat();
  return (v1.mat() * a).trace() + (b * v2.mat()).trace();
}

double discrepancy_logfro(const SpdMatrix& v1, const SpdMatrix& v2) {
  if (v1.dim() != v2.dim()) fail(errc::invalid_argument, "dimension mismatch");
  EigenDecomposition ed = sym_eigen(v1);
  const auto p = v1.dim();
  if (!(ed.values(p - 1) > pd_tolerance(ed.values(0))))
    fail(errc::singular, "matrix is singular to working precision");
  const Vector is = ed.values.cwiseSqrt().cwiseInverse();
  const Matrix w = ed.vectors * is.asDiagonal() * ed.vectors.transpose();
  Matrix mid = w * v2.mat() * w;
  mid = 0.5 * (mid + mid.transpose());
  return matrix_log(SpdMatrix(mid)).norm();
}

double rmse(const std::vector<SpdMatrix>& estimates, const SpdMatrix& truth) {
  if (estimates.empty()) fail(errc::invalid_argument, "empty estimate list");
  const Matrix t = detail::trace_normalize(truth.mat());
  double s = 0.0;
  for (const SpdMatrix& e : estimates) {
    if (e.dim() != truth.dim()) fail(errc::invalid_argument, "dimension mismatch");
    s += (detail::trace_normalize(e.mat()) - t).squaredNorm();
  }
  return std::sqrt(s / static_cast<double>(estimates.size()));
}

Metric parse_metric(const std::string& name) {
  if (name == "frobenius") return Metric::frobenius;
  if (name == "logfro") return Metric::logfro;
  fail(errc::invalid_argument, "unknown metric '" + name + "'");
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "dimension") return SweepAxis::dimension;
  if (name == "alpha") return SweepAxis::alpha;
  if (name == "xi") return SweepAxis::xi;
  if (name == "k") return SweepAxis::k;
  if (name == "t_df") return SweepAxis::t_df;
  fail(errc::invalid_argument, "unknown sweep axis '" + name + "'");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::dimension: return "dimension";
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::xi: return "xi";
    case SweepAxis::k: return "k";
    case SweepAxis::t_df: return "t_df";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

constexpr std::array<const char*, 9> kRegistry = {
    "scm", "tme", "lnsmi", "sscm", "identity", "proposed", "proposed_raw", "kl", "renyi"};

bool takes_alpha(const std::string& name) {
  return name == "lnsmi" || name == "proposed" || name == "proposed_raw" || name == "kl" ||
         name == "renyi";
}

bool takes_weight(const std::string& name) {
  return name == "tme" || name == "proposed" || name == "proposed_raw" || name == "renyi";
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io, "cannot open output file: " + path);
  out << text;
  out.flush();
  if (!out) fail(errc::io, "write failed: " + path);
}

}  // namespace

EstimatorSpec parse_estimator_spec(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) fail(errc::invalid_argument, "empty estimator spec");
  EstimatorSpec es;
  es.label = s;
  std::string core = s;
  const auto at = core.find('@');
  if (at != std::string::npos) {
    es.weight = core.substr(at + 1);
    core.erase(at);
    if (es.weight.empty()) fail(errc::invalid_argument, "empty weight in estimator spec: " + s);
  }
  const auto colon = core.find(':');
  if (colon != std::string::npos) {
    const std::string a = core.substr(colon + 1);
    core.erase(colon);
    if (a.empty()) fail(errc::invalid_argument, "empty alpha in estimator spec: " + s);
    es.has_alpha = true;
    if (a == "auto") {
      es.alpha_auto = true;
    } else {
      try {
        std::size_t used = 0;
        es.alpha = std::stod(a, &used);
        if (used != a.size()) throw std::invalid_argument(a);
      } catch (const std::exception&) {
        fail(errc::invalid_argument, "bad alpha '" + a + "' in estimator spec: " + s);
      }
    }
  }
  es.name = core;
  if (std::find(kRegistry.begin(), kRegistry.end(), es.name) == kRegistry.end())
    fail(errc::invalid_argument, "unknown estimator '" + es.name + "'");
  if (es.has_alpha && !takes_alpha(es.name))
    fail(errc::invalid_argument, "estimator '" + es.name + "' takes no alpha");
  if (!es.weight.empty() && !takes_weight(es.name))
    fail(errc::invalid_argument, "estimator '" + es.name + "' takes no weight");
  if (es.has_alpha && !es.alpha_auto) {
    if (!std::isfinite(es.alpha) || es.alpha < 0.0)
      fail(errc::invalid_argument, "alpha must be a finite nonnegative real: " + s);
    if (es.name != "renyi" && es.alpha > 1.0)
      fail(errc::invalid_argument, "alpha must lie in [0, 1]: " + s);
  }
  if (!es.weight.empty()) parse_weight(es.weight, 2);  // grammar check only
  return es;
}

std::vector<EstimatorSpec> parse_estimator_list(const std::string& comma_list) {
  std::vector<EstimatorSpec> out;
  std::string::size_type start = 0;
  while (start <= comma_list.size()) {
    const auto comma = comma_list.find(',', start);
    const std::string tok =
        comma == std::string::npos ? comma_list.substr(start) : comma_list.substr(start, comma - start);
    out.push_back(parse_estimator_spec(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

EstimatorResult evaluate_estimator(const EstimatorSpec& spec, const DataSet& x,
                                   const EvalContext& ctx) {
  const int p = static_cast<int>(x.p());

  auto direct = [](SpdMatrix m) {
    EstimatorResult r;
    r.iterations = 0;
    r.converged = true;
    r.status = SolveStatus::converged;
    r.residual = 0.0;
    r.lambda_max = m.lambda_max();
    r.lambda_min = m.lambda_min();
    r.estimate = std::move(m);
    return r;
  };

  if (spec.name == "scm") return direct(scm(x));
  if (spec.name == "sscm") return direct(sscm(x));
  if (spec.name == "identity") {
    const double tr = ctx.trace > 0.0 ? ctx.trace : static_cast<double>(p);
    return direct(SpdMatrix((tr / p) * Matrix::Identity(p, p)));
  }

  const WeightFunction wf = parse_weight(spec.weight.empty() ? "tyler" : spec.weight, p);
  SolverConfig cfg;
  cfg.epsilon = ctx.epsilon;
  cfg.max_iter = ctx.max_iter;

  if (spec.name == "tme") return m_fixed_point(x, wf, cfg);

  if (spec.alpha_auto) {
    cfg.alpha = select_alpha(x, ctx.alpha_m2, ctx.bootstrap_replicates, ctx.alpha_seed).alpha;
  } else if (spec.has_alpha) {
    cfg.alpha = spec.alpha;
  } else if (ctx.axis_alpha) {
    cfg.alpha = *ctx.axis_alpha;
  } else {
    fail(errc::invalid_argument,
         "estimator '" + spec.name + "' needs :<alpha>, :auto, or an alpha axis");
  }

  if (spec.name == "lnsmi") return lnsmi(x, cfg);
  if (spec.name == "proposed") return proposed(x, wf, cfg);
  cfg.normalize = false;
  if (spec.name == "proposed_raw") return proposed_raw(x, wf, cfg);
  if (spec.name == "kl") return fixed_point_kl(x, cfg);
  if (spec.name == "renyi") return fixed_point_renyi(x, wf, cfg);
  fail(errc::invalid_argument, "unknown estimator '" + spec.name + "'");
}

SweepResult run_sweep(const Scenario& scn_template, SweepAxis axis, const std::vector<double>& grid,
                      const std::vector<EstimatorSpec>& estimators, int trials,
                      const SweepOptions& opt) {
  const int t = trials > 0 ? trials : scn_template.trials;
  SweepResult out;
  out.axis = axis;
  out.grid = grid;
  out.trials = t;

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double v = grid[gi];
    Scenario scn = scn_template;
    switch (axis) {
      case SweepAxis::dimension:
        if (!(v >= 1.0) || std::fabs(v - std::round(v)) > 1e-9)
          fail(errc::invalid_argument, "dimension grid values must be positive integers");
        scn.p = static_cast<int>(std::lround(v));
        break;
      case SweepAxis::alpha:
        if (!(v >= 0.0)) fail(errc::invalid_argument, "alpha grid values must be nonnegative");
        break;
      case SweepAxis::xi:
        scn.xi = v;
        break;
      case SweepAxis::k:
        scn.k = v;
        break;
      case SweepAxis::t_df:
        if (!(v >= 1.0) || std::fabs(v - std::round(v)) > 1e-9)
          fail(errc::invalid_argument, "t_df grid values must be positive integers");
        scn.body = BodyFamily::t_dist;
        scn.t_df = static_cast<int>(std::lround(v));
        break;
    }
    scn.seed = child_seed(scn_template.seed, kStageAxis, gi);
    scn.validate();

    std::optional<SpdMatrix> pinned;
    if (opt.fixed_sigma) pinned = make_sigma(scn, 0);

    struct Acc {
      double sum_sq = 0.0;
      int ok = 0;
      int failed = 0;
    };
    std::vector<Acc> acc(estimators.size());

    for (int trial = 0; trial < t; ++trial) {
      const ScenarioDraw draw =
          scenario_dataset(scn, static_cast<std::uint64_t>(trial), pinned ? &*pinned : nullptr);
      const Matrix truth_tn = detail::trace_normalize(draw.sigma.mat());
      std::optional<SpdMatrix> truth_spd;
      if (opt.metric == Metric::logfro) truth_spd.emplace(truth_tn);

      EvalContext ctx;
      ctx.trace = scn.trace_value();
      if (axis == SweepAxis::alpha) ctx.axis_alpha = v;
      ctx.bootstrap_replicates = opt.bootstrap_replicates;
      ctx.alpha_m2 = opt.alpha_m2;
      ctx.alpha_seed = child_seed(scn.seed, kStageAlphaBoot, static_cast<std::uint64_t>(trial));
      ctx.epsilon = opt.epsilon;
      ctx.max_iter = opt.max_iter;

      for (std::size_t ei = 0; ei < estimators.size(); ++ei) {
        try {
          const EstimatorResult r = evaluate_estimator(estimators[ei], draw.data, ctx);
          if (r.status != SolveStatus::converged || !r.estimate) {
            ++acc[ei].failed;
            continue;
          }
          double d;
          if (opt.metric == Metric::frobenius) {
            d = (detail::trace_normalize(r.estimate->mat()) - truth_tn).norm();
          } else {
            d = discrepancy_logfro(trace_normalize(*r.estimate), *truth_spd);
          }
          if (!std::isfinite(d)) {
            ++acc[ei].failed;
            continue;
          }
          acc[ei].sum_sq += d * d;
          ++acc[ei].ok;
        } catch (const Error&) {
          ++acc[ei].failed;
        }
      }
    }

    for (std::size_t ei = 0; ei < estimators.size(); ++ei) {
      SweepCell c;
      c.axis_value = v;
      c.estimator = estimators[ei].label;
      c.trials_ok = acc[ei].ok;
      c.trials_failed = acc[ei].failed;
      c.rmse = acc[ei].ok > 0 ? std::sqrt(acc[ei].sum_sq / acc[ei].ok)
                              : std::numeric_limits<double>::quiet_NaN();
      out.cells.push_back(std::move(c));
    }
  }
  return out;
}

BreakdownReport breakdown_probe(int n_good, int p, const WeightFunction& wf, double alpha,
                                const Contamination& contamination, std::uint64_t seed,
                                const BreakdownOptions& opt) {
  if (n_good < 1) fail(errc::invalid_argument, "n_good must be positive");
  if (p < 1) fail(errc::invalid_argument, "p must be positive");
  if (contamination.m < 0) fail(errc::invalid_argument, "m must be nonnegative");
  if (wf.dim() != p) fail(errc::invalid_argument, "weight dimension mismatch");
  if (wf.family() != WeightFamily::huber && wf.family() != WeightFamily::t_dist)
    fail(errc::invalid_argument, "breakdown probe needs a huber or t weight (finite kappa)");
  if (opt.trials < 1) fail(errc::invalid_argument, "trials must be positive");

  const int m = contamination.m;
  const double kappa = wf.kappa();
  BreakdownReport rep;
  rep.n_good = n_good;
  rep.p = p;
  rep.m = m;
  rep.trials = opt.trials;
  rep.epsilon_m = static_cast<double>(m) / static_cast<double>(n_good + m);
  rep.threshold_hi = 1.0 - static_cast<double>(p) / kappa;
  rep.threshold_lo = rep.threshold_hi - static_cast<double>(p - 1) / static_cast<double>(n_good);

  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.epsilon = opt.epsilon;
  cfg.max_iter = opt.max_iter;
  cfg.normalize = false;

  const SpdMatrix eye = SpdMatrix::identity(p);
  std::map<SolveStatus, StatusTally> tally;
  double maxd = std::numeric_limits<double>::quiet_NaN();

  for (int trial = 0; trial < opt.trials; ++trial) {
    // Good data is shared across m so the frontier scan sees contamination
    // effects only.
    const DataSet good =
        sample_gaussian(n_good, eye, child_seed(seed, kStageBody, static_cast<std::uint64_t>(trial)));
    Matrix all(n_good + m, p);
    all.topRows(n_good) = good.rows();
    if (m > 0) {
      if (contamination.kind == Contamination::Kind::zeros) {
        all.bottomRows(m).setZero();
      } else {
        std::mt19937_64 gen = substream(seed, kStageOutliers, static_cast<std::uint64_t>(trial));
        std::normal_distribution<double> nd;
        Vector u(p);
        double nn = 0.0;
        do {
          for (int j = 0; j < p; ++j) u(j) = nd(gen);
          nn = u.norm();
        } while (nn < 1e-12);
        const Vector center = (contamination.norm / nn) * u;
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < p; ++j) all(n_good + i, j) = center(j) + 0.1 * nd(gen);
        }
      }
    }

    const EstimatorResult r = fixed_point_variant_eq10(DataSet(std::move(all)), wf, cfg);
    StatusTally& t = tally[r.status];
    t.status = r.status;
    ++t.count;
    if (std::isfinite(r.lambda_max))
      t.lambda_max = std::isnan(t.lambda_max) ? r.lambda_max : std::max(t.lambda_max, r.lambda_max);
    if (std::isfinite(r.lambda_min))
      t.lambda_min = std::isnan(t.lambda_min) ? r.lambda_min : std::min(t.lambda_min, r.lambda_min);

    if (r.status == SolveStatus::converged && r.estimate) {
      const EstimatorResult clean = fixed_point_variant_eq10(good, wf, cfg);
      if (clean.status == SolveStatus::converged && clean.estimate) {
        double d;
        try {
          d = discrepancy_sym(*r.estimate, *clean.estimate);
        } catch (const Error&) {
          d = std::numeric_limits<double>::infinity();
        }
        maxd = std::isnan(maxd) ? d : std::max(maxd, d);
      }
    }
  }

  for (auto& [status, t] : tally) rep.tallies.push_back(t);
  rep.max_discrepancy = maxd;
  return rep;
}

std::vector<RankedPoint> mahalanobis_ranking(const DataSet& x, const SpdMatrix& v) {
  if (v.dim() != x.p()) fail(errc::invalid_argument, "dimension mismatch");
  const Matrix a = spd_inverse(v).mat();
  const Matrix& rows = x.rows();
  const Vector d = (rows * a).cwiseProduct(rows).rowwise().sum();
  std::vector<RankedPoint> out(static_cast<std::size_t>(x.n()));
  for (Eigen::Index i = 0; i < x.n(); ++i)
    out[static_cast<std::size_t>(i)] = {static_cast<int>(i), d(i)};
  std::sort(out.begin(), out.end(), [](const RankedPoint& lhs, const RankedPoint& rhs) {
    if (lhs.distance != rhs.distance) return lhs.distance > rhs.distance;
    return lhs.index < rhs.index;
  });
  return out;
}

std::string csv_text(const SweepResult& r) {
  std::string out = "axis_value,estimator,rmse,trials_ok,trials_failed\n";
  for (const SweepCell& c : r.cells) {
    out += fmt_g(c.axis_value);
    out += ',';
    out += c.estimator;
    out += ',';
    out += fmt_g(c.rmse);
    out += ',';
    out += std::to_string(c.trials_ok);
    out += ',';
    out += std::to_string(c.trials_failed);
    out += '\n';
  }
  return out;
}

std::string csv_text(const std::vector<BreakdownReport>& reports) {
  std::string out = "epsilon_m,status,count,lambda_max,threshold_lo,threshold_hi\n";
  for (const BreakdownReport& rep : reports) {
    for (const StatusTally& t : rep.tallies) {
      out += fmt_g(rep.epsilon_m);
      out += ',';
      out += to_string(t.status);
      out += ',';
      out += std::to_string(t.count);
      out += ',';
      out += fmt_g(t.lambda_max);
      out += ',';
      out += fmt_g(rep.threshold_lo);
      out += ',';
      out += fmt_g(rep.threshold_hi);
      out += '\n';
    }
  }
  return out;
}

void emit_csv(const SweepResult& r, const std::string& path) { write_text(path, csv_text(r)); }

void emit_csv(const BreakdownReport& r, const std::string& path) {
  write_text(path, csv_text(std::vector<BreakdownReport>{r}));
}

void emit_csv(const std::vector<BreakdownReport>& reports, const std::string& path) {
  write_text(path, csv_text(reports));
}

}  // namespace rsc
