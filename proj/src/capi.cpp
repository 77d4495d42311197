#include "robustscatter.h"

#include <cstddef>
#include <exception>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "datagen.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "experiments.hpp"
#include "linalg.hpp"
#include "shrinkage.hpp"
#include "weights.hpp"

struct rsc_matrix {
  rsc::Matrix m;
};

struct rsc_dataset {
  rsc::DataSet d;
};

struct rsc_weight {
  rsc::WeightFunction w;
};

struct rsc_result {
  rsc::EstimatorResult r;
};

struct rsc_scenario {
  rsc::Scenario s;
};

struct rsc_sweep {
  rsc::SweepResult r;
};

struct rsc_breakdown {
  struct Row {
    double epsilon_m;
    const char* status;  // static storage from to_string
    int count;
    double lambda_max;
    double threshold_lo;
    double threshold_hi;
  };
  std::vector<rsc::BreakdownReport> reports;
  std::vector<Row> rows;
};

namespace {

thread_local std::string g_last_error = "ok";

rsc_status map_code(rsc::errc c) {
  switch (c) {
    case rsc::errc::invalid_argument: return RSC_ERR_INVALID_ARGUMENT;
    case rsc::errc::invalid_input: return RSC_ERR_INVALID_INPUT;
    case rsc::errc::singular: return RSC_ERR_SINGULAR;
    case rsc::errc::degenerate: return RSC_ERR_DEGENERATE;
    case rsc::errc::domain: return RSC_ERR_DOMAIN;
    case rsc::errc::io: return RSC_ERR_IO;
    case rsc::errc::numeric: return RSC_ERR_NUMERIC;
  }
  return RSC_ERR_UNKNOWN;
}

template <class F>
rsc_status guarded(F&& f) {
  try {
    return f();
  } catch (const rsc::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RSC_ERR_UNKNOWN;
  }
}

rsc_status arg_error(const char* msg) {
  g_last_error = msg;
  return RSC_ERR_INVALID_ARGUMENT;
}

rsc::EvalContext eval_context(const rsc_solver_config* cfg) {
  rsc::EvalContext ctx;
  if (!cfg) return ctx;
  if (cfg->alpha >= 0.0) ctx.axis_alpha = cfg->alpha;
  ctx.epsilon = cfg->epsilon;
  ctx.max_iter = cfg->max_iter;
  ctx.bootstrap_replicates = cfg->bootstrap_replicates;
  ctx.alpha_m2 = cfg->alpha_m2 == 1 ? rsc::M2Source::tme_inverse : rsc::M2Source::scm_inverse;
  ctx.alpha_seed = cfg->alpha_seed;
  return ctx;
}

}  // namespace

extern "C" {

const char* rsc_last_error(void) { return g_last_error.c_str(); }

const char* rsc_version(void) { return "1.0.0"; }

rsc_status rsc_matrix_create(const double* data, int rows, int cols, rsc_matrix** out) {
  if (!data || !out) return arg_error("null pointer");
  if (rows < 0 || cols < 1) return arg_error("bad matrix dimensions");
  return guarded([&]() -> rsc_status {
    rsc::Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i) * cols + j];
    *out = new rsc_matrix{std::move(m)};
    return RSC_OK;
  });
}

int rsc_matrix_rows(const rsc_matrix* m) { return m ? static_cast<int>(m->m.rows()) : 0; }

int rsc_matrix_cols(const rsc_matrix* m) { return m ? static_cast<int>(m->m.cols()) : 0; }

rsc_status rsc_matrix_get(const rsc_matrix* m, int i, int j, double* out) {
  if (!m || !out) return arg_error("null pointer");
  if (i < 0 || i >= m->m.rows() || j < 0 || j >= m->m.cols())
    return arg_error("index out of range");
  *out = m->m(i, j);
  return RSC_OK;
}

rsc_status rsc_matrix_copy_data(const rsc_matrix* m, double* out, int len) {
  if (!m || !out) return arg_error("null pointer");
  if (static_cast<long long>(len) != static_cast<long long>(m->m.size()))
    return arg_error("len must equal rows*cols");
  for (int i = 0; i < m->m.rows(); ++i)
    for (int j = 0; j < m->m.cols(); ++j)
      out[static_cast<std::size_t>(i) * m->m.cols() + j] = m->m(i, j);
  return RSC_OK;
}

rsc_status rsc_matrix_write_csv(const rsc_matrix* m, const char* path) {
  if (!m || !path) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    rsc::write_matrix_csv(path, m->m);
    return RSC_OK;
  });
}

void rsc_matrix_free(rsc_matrix* m) { delete m; }

rsc_status rsc_dataset_create(const double* data, int n, int p, rsc_dataset** out) {
  if (!data || !out) return arg_error("null pointer");
  if (n < 0 || p < 1) return arg_error("bad dataset dimensions");
  return guarded([&]() -> rsc_status {
    rsc::Matrix m(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) m(i, j) = data[static_cast<std::size_t>(i) * p + j];
    *out = new rsc_dataset{rsc::DataSet(std::move(m))};
    return RSC_OK;
  });
}

rsc_status rsc_dataset_from_csv(const char* path, int skip_header, rsc_dataset** out) {
  if (!path || !out) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    *out = new rsc_dataset{rsc::read_csv(path, skip_header != 0)};
    return RSC_OK;
  });
}

int rsc_dataset_rows(const rsc_dataset* d) { return d ? static_cast<int>(d->d.n()) : 0; }

int rsc_dataset_cols(const rsc_dataset* d) { return d ? static_cast<int>(d->d.p()) : 0; }

void rsc_dataset_free(rsc_dataset* d) { delete d; }

rsc_status rsc_weight_parse(const char* spec, int dim, rsc_weight** out) {
  if (!spec || !out) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    *out = new rsc_weight{rsc::parse_weight(spec, dim)};
    return RSC_OK;
  });
}

double rsc_weight_kappa(const rsc_weight* w) {
  return w ? w->w.kappa() : std::numeric_limits<double>::quiet_NaN();
}

rsc_status rsc_weight_eval(const rsc_weight* w, double s, double* out) {
  if (!w || !out) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    *out = w->w.w(s);
    return RSC_OK;
  });
}

void rsc_weight_free(rsc_weight* w) { delete w; }

void rsc_solver_config_init(rsc_solver_config* cfg) {
  if (!cfg) return;
  cfg->alpha = -1.0;
  cfg->epsilon = 1e-6;
  cfg->max_iter = 1000;
  cfg->bootstrap_replicates = rsc::kDefaultBootstrapReplicates;
  cfg->alpha_m2 = 0;
  cfg->alpha_seed = 1;
}

rsc_status rsc_estimate(const rsc_dataset* data, const char* method, const rsc_solver_config* cfg,
                        rsc_result** out) {
  if (!data || !method || !out) return arg_error("null pointer");
  if (cfg) {
    if (!(cfg->epsilon > 0.0)) return arg_error("epsilon must be positive");
    if (cfg->max_iter < 1) return arg_error("max_iter must be positive");
    if (cfg->bootstrap_replicates < 1) return arg_error("bootstrap_replicates must be positive");
    if (cfg->alpha_m2 != 0 && cfg->alpha_m2 != 1) return arg_error("alpha_m2 must be 0 or 1");
  }
  return guarded([&]() -> rsc_status {
    const rsc::EstimatorSpec spec = rsc::parse_estimator_spec(method);
    rsc::EstimatorResult r = rsc::evaluate_estimator(spec, data->d, eval_context(cfg));
    *out = new rsc_result{std::move(r)};
    return RSC_OK;
  });
}

int rsc_result_status(const rsc_result* r) {
  return r ? static_cast<int>(r->r.status) : static_cast<int>(rsc::SolveStatus::invalid_input);
}

const char* rsc_result_status_name(const rsc_result* r) {
  return r ? rsc::to_string(r->r.status) : "invalid_input";
}

int rsc_result_converged(const rsc_result* r) { return r && r->r.converged ? 1 : 0; }

int rsc_result_iterations(const rsc_result* r) { return r ? r->r.iterations : 0; }

double rsc_result_residual(const rsc_result* r) {
  return r ? r->r.residual : std::numeric_limits<double>::quiet_NaN();
}

double rsc_result_lambda_max(const rsc_result* r) {
  return r ? r->r.lambda_max : std::numeric_limits<double>::quiet_NaN();
}

double rsc_result_lambda_min(const rsc_result* r) {
  return r ? r->r.lambda_min : std::numeric_limits<double>::quiet_NaN();
}

rsc_status rsc_result_estimate(const rsc_result* r, rsc_matrix** out) {
  if (!r || !out) return arg_error("null pointer");
  if (!r->r.estimate) {
    g_last_error = r->r.message.empty() ? "no estimate produced" : r->r.message;
    return RSC_ERR_DEGENERATE;
  }
  *out = new rsc_matrix{r->r.estimate->mat()};
  return RSC_OK;
}

void rsc_result_free(rsc_result* r) { delete r; }

rsc_status rsc_equation_residual(const rsc_dataset* data, const rsc_matrix* v, const char* weight,
                                 const double alpha, const char* equation, double* out) {
  if (!data || !v || !equation || !out) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    const std::string eq = equation;
    rsc::EstEq which;
    if (eq == "eq4") which = rsc::EstEq::eq4;
    else if (eq == "eq5") which = rsc::EstEq::eq5;
    else if (eq == "eq6") which = rsc::EstEq::eq6;
    else if (eq == "eq10") which = rsc::EstEq::eq10;
    else if (eq == "eq11") which = rsc::EstEq::eq11;
    else return arg_error("unknown equation (eq4|eq5|eq6|eq10|eq11)");
    const rsc::WeightFunction wf =
        rsc::parse_weight(weight ? weight : "tyler", static_cast<int>(data->d.p()));
    *out = rsc::equation_residual(data->d, rsc::SpdMatrix(v->m), wf, alpha, which);
    return RSC_OK;
  });
}

rsc_status rsc_coupon_resamples(int n, int k, double* out) {
  if (!out) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    *out = rsc::coupon_resamples(n, k);
    return RSC_OK;
  });
}

rsc_status rsc_select_alpha(const rsc_dataset* data, const char* m2_source, int replicates,
                            uint64_t seed, double* alpha_out, double* raw_out,
                            int* resample_size_out) {
  if (!data || !m2_source || !alpha_out) return arg_error("null pointer");
  rsc::M2Source src;
  const std::string s = m2_source;
  if (s == "scm") src = rsc::M2Source::scm_inverse;
  else if (s == "tme") src = rsc::M2Source::tme_inverse;
  else return arg_error("m2_source must be scm or tme");
  return guarded([&]() -> rsc_status {
    const rsc::AlphaSelection sel = rsc::select_alpha(data->d, src, replicates, seed);
    *alpha_out = sel.alpha;
    if (raw_out) *raw_out = sel.raw;
    if (resample_size_out) *resample_size_out = sel.resample_size;
    return RSC_OK;
  });
}

rsc_status rsc_scenario_parse(const char* text, rsc_scenario** out) {
  if (!text || !out) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    *out = new rsc_scenario{rsc::parse_scenario(text)};
    return RSC_OK;
  });
}

rsc_status rsc_scenario_from_file(const char* path, rsc_scenario** out) {
  if (!path || !out) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    *out = new rsc_scenario{rsc::load_scenario(path)};
    return RSC_OK;
  });
}

rsc_status rsc_scenario_set(rsc_scenario* s, const char* key, const char* value) {
  if (!s || !key || !value) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    // Round-trip through the parser so overrides get the same validation as
    // config files (unknown keys rejected, ranges checked).
    const std::string text =
        rsc::serialize_scenario(s->s) + key + " = " + value + "\n";
    s->s = rsc::parse_scenario(text);
    return RSC_OK;
  });
}

int rsc_scenario_dimension(const rsc_scenario* s) { return s ? s->s.p : 0; }

int rsc_scenario_trials(const rsc_scenario* s) { return s ? s->s.trials : 0; }

void rsc_scenario_free(rsc_scenario* s) { delete s; }

rsc_status rsc_sweep_run(const rsc_scenario* s, const char* axis, const double* grid, int grid_len,
                         const char* estimators, int trials, const char* metric, int fixed_sigma,
                         rsc_sweep** out) {
  if (!s || !axis || !estimators || !out) return arg_error("null pointer");
  if (grid_len < 0 || (grid_len > 0 && !grid)) return arg_error("bad grid");
  return guarded([&]() -> rsc_status {
    const rsc::SweepAxis ax = rsc::parse_axis(axis);
    const std::vector<double> g(grid, grid + grid_len);
    const std::vector<rsc::EstimatorSpec> ests = rsc::parse_estimator_list(estimators);
    rsc::SweepOptions opt;
    if (metric) opt.metric = rsc::parse_metric(metric);
    opt.fixed_sigma = fixed_sigma != 0;
    rsc::SweepResult r = rsc::run_sweep(s->s, ax, g, ests, trials, opt);
    *out = new rsc_sweep{std::move(r)};
    return RSC_OK;
  });
}

int rsc_sweep_rows(const rsc_sweep* s) { return s ? static_cast<int>(s->r.cells.size()) : 0; }

rsc_status rsc_sweep_cell(const rsc_sweep* s, int row, double* axis_value, const char** estimator,
                          double* rmse, int* trials_ok, int* trials_failed) {
  if (!s) return arg_error("null pointer");
  if (row < 0 || row >= static_cast<int>(s->r.cells.size())) return arg_error("row out of range");
  const rsc::SweepCell& c = s->r.cells[static_cast<std::size_t>(row)];
  if (axis_value) *axis_value = c.axis_value;
  if (estimator) *estimator = c.estimator.c_str();
  if (rmse) *rmse = c.rmse;
  if (trials_ok) *trials_ok = c.trials_ok;
  if (trials_failed) *trials_failed = c.trials_failed;
  return RSC_OK;
}

rsc_status rsc_sweep_write_csv(const rsc_sweep* s, const char* path) {
  if (!s || !path) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    rsc::emit_csv(s->r, path);
    return RSC_OK;
  });
}

void rsc_sweep_free(rsc_sweep* s) { delete s; }

rsc_status rsc_breakdown_run(int n_good, int p, const char* weight, double alpha,
                             const char* contamination, double cluster_norm, const int* m_grid,
                             int m_len, int trials, uint64_t seed, rsc_breakdown** out) {
  if (!weight || !contamination || !out) return arg_error("null pointer");
  if (m_len < 1 || !m_grid) return arg_error("empty m grid");
  const std::string mode = contamination;
  if (mode != "zeros" && mode != "cluster") return arg_error("contamination must be zeros or cluster");
  return guarded([&]() -> rsc_status {
    const rsc::WeightFunction wf = rsc::parse_weight(weight, p);
    rsc::BreakdownOptions opt;
    if (trials > 0) opt.trials = trials;
    auto handle = std::make_unique<rsc_breakdown>();
    for (int i = 0; i < m_len; ++i) {
      const rsc::Contamination cont = mode == "zeros"
                                          ? rsc::Contamination::zeros(m_grid[i])
                                          : rsc::Contamination::far_cluster(m_grid[i], cluster_norm);
      handle->reports.push_back(rsc::breakdown_probe(n_good, p, wf, alpha, cont, seed, opt));
    }
    for (const rsc::BreakdownReport& rep : handle->reports)
      for (const rsc::StatusTally& t : rep.tallies)
        handle->rows.push_back({rep.epsilon_m, rsc::to_string(t.status), t.count, t.lambda_max,
                                rep.threshold_lo, rep.threshold_hi});
    *out = handle.release();
    return RSC_OK;
  });
}

int rsc_breakdown_rows(const rsc_breakdown* b) {
  return b ? static_cast<int>(b->rows.size()) : 0;
}

rsc_status rsc_breakdown_row(const rsc_breakdown* b, int row, double* epsilon_m,
                             const char** status, int* count, double* lambda_max,
                             double* threshold_lo, double* threshold_hi) {
  if (!b) return arg_error("null pointer");
  if (row < 0 || row >= static_cast<int>(b->rows.size())) return arg_error("row out of range");
  const rsc_breakdown::Row& r = b->rows[static_cast<std::size_t>(row)];
  if (epsilon_m) *epsilon_m = r.epsilon_m;
  if (status) *status = r.status;
  if (count) *count = r.count;
  if (lambda_max) *lambda_max = r.lambda_max;
  if (threshold_lo) *threshold_lo = r.threshold_lo;
  if (threshold_hi) *threshold_hi = r.threshold_hi;
  return RSC_OK;
}

rsc_status rsc_breakdown_write_csv(const rsc_breakdown* b, const char* path) {
  if (!b || !path) return arg_error("null pointer");
  return guarded([&]() -> rsc_status {
    rsc::emit_csv(b->reports, path);
    return RSC_OK;
  });
}

void rsc_breakdown_free(rsc_breakdown* b) { delete b; }

rsc_status rsc_rank(const rsc_dataset* data, const rsc_matrix* v, int* indices, double* distances,
                    int n) {
  if (!data || !v || !indices) return arg_error("null pointer");
  if (n != static_cast<int>(data->d.n())) return arg_error("n must equal the dataset row count");
  return guarded([&]() -> rsc_status {
    const std::vector<rsc::RankedPoint> ranked =
        rsc::mahalanobis_ranking(data->d, rsc::SpdMatrix(v->m));
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      indices[i] = ranked[i].index;
      if (distances) distances[i] = ranked[i].distance;
    }
    return RSC_OK;
  });
}

}  // extern "C"
