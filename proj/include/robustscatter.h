#ifndef ROBUSTSCATTER_H
#define ROBUSTSCATTER_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/// Status codes. Every fallible call returns one; RSC_OK means success and
/// anything else leaves a human-readable message in rsc_last_error().
typedef enum rsc_status {
  RSC_OK = 0,
  RSC_ERR_INVALID_ARGUMENT = 1,
  RSC_ERR_INVALID_INPUT = 2,
  RSC_ERR_SINGULAR = 3,
  RSC_ERR_DEGENERATE = 4,
  RSC_ERR_DOMAIN = 5,
  RSC_ERR_IO = 6,
  RSC_ERR_NUMERIC = 7,
  RSC_ERR_UNKNOWN = 8
} rsc_status;

typedef struct rsc_matrix rsc_matrix;
typedef struct rsc_dataset rsc_dataset;
typedef struct rsc_weight rsc_weight;
typedef struct rsc_result rsc_result;
typedef struct rsc_scenario rsc_scenario;
typedef struct rsc_sweep rsc_sweep;
typedef struct rsc_breakdown rsc_breakdown;

/// Message for the last failing call on this thread. Never NULL.
const char *rsc_last_error(void);

const char *rsc_version(void);

/* ---- matrices ---- */

/// Dense matrix from row-major data.
rsc_status rsc_matrix_create(const double *data, int rows, int cols, rsc_matrix **out);
int rsc_matrix_rows(const rsc_matrix *m);
int rsc_matrix_cols(const rsc_matrix *m);
rsc_status rsc_matrix_get(const rsc_matrix *m, int i, int j, double *out);
/// Copy all entries row-major into out, which holds len doubles
/// (len must equal rows*cols).
rsc_status rsc_matrix_copy_data(const rsc_matrix *m, double *out, int len);
rsc_status rsc_matrix_write_csv(const rsc_matrix *m, const char *path);
void rsc_matrix_free(rsc_matrix *m);

/* ---- datasets (n rows of dimension p) ---- */

rsc_status rsc_dataset_create(const double *data, int n, int p, rsc_dataset **out);
rsc_status rsc_dataset_from_csv(const char *path, int skip_header, rsc_dataset **out);
int rsc_dataset_rows(const rsc_dataset *d);
int rsc_dataset_cols(const rsc_dataset *d);
void rsc_dataset_free(rsc_dataset *d);

/* ---- weight functions ---- */

/// spec: tyler | huber:<c> | t:<nu> | const:<beta>
rsc_status rsc_weight_parse(const char *spec, int dim, rsc_weight **out);
double rsc_weight_kappa(const rsc_weight *w);
rsc_status rsc_weight_eval(const rsc_weight *w, double s, double *out);
void rsc_weight_free(rsc_weight *w);

/* ---- estimation ---- */

typedef struct rsc_solver_config {
  double alpha;             /* shrinkage coefficient; < 0 means unset */
  double epsilon;           /* stopping tolerance */
  int max_iter;
  int bootstrap_replicates; /* alpha = auto bootstrap size */
  int alpha_m2;             /* M2 for alpha = auto: 0 = SCM inverse, 1 = TME inverse */
  uint64_t alpha_seed;      /* substream for alpha = auto */
} rsc_solver_config;

/// Fill with defaults: alpha unset, epsilon 1e-6, max_iter 1000,
/// 200 bootstrap replicates on the SCM inverse, seed 1.
void rsc_solver_config_init(rsc_solver_config *cfg);

/// method: name[:alpha][@weight] with name in {scm, tme, lnsmi, sscm,
/// identity, proposed, proposed_raw, kl, renyi}; alpha may be `auto`.
/// cfg may be NULL for defaults. Numerical failure is reported through the
/// result status, not the return code.
rsc_status rsc_estimate(const rsc_dataset *data, const char *method,
                        const rsc_solver_config *cfg, rsc_result **out);

/// Solver outcome as an integer: 0 converged, 1 max_iter,
/// 2 degenerate_shrinking, 3 degenerate_exploding, 4 invalid_input.
int rsc_result_status(const rsc_result *r);
const char *rsc_result_status_name(const rsc_result *r);
int rsc_result_converged(const rsc_result *r);
int rsc_result_iterations(const rsc_result *r);
double rsc_result_residual(const rsc_result *r);
double rsc_result_lambda_max(const rsc_result *r);
double rsc_result_lambda_min(const rsc_result *r);
/// Copy of the estimate; fails if the run produced none.
rsc_status rsc_result_estimate(const rsc_result *r, rsc_matrix **out);
void rsc_result_free(rsc_result *r);

/// Relative residual of an estimating equation at v.
/// equation: eq4 | eq5 | eq6 | eq10 | eq11.
rsc_status rsc_equation_residual(const rsc_dataset *data, const rsc_matrix *v,
                                 const char *weight, double alpha, const char *equation,
                                 double *out);

/* ---- shrinkage coefficient ---- */

/// Expected draws to collect k distinct coupons out of n.
rsc_status rsc_coupon_resamples(int n, int k, double *out);

/// Bootstrap plug-in alpha. m2_source: "scm" or "tme". raw_out and
/// resample_size_out may be NULL.
rsc_status rsc_select_alpha(const rsc_dataset *data, const char *m2_source, int replicates,
                            uint64_t seed, double *alpha_out, double *raw_out,
                            int *resample_size_out);

/* ---- scenarios and sweeps ---- */

/// Flat key = value config; see the Scenario field list in the docs.
rsc_status rsc_scenario_parse(const char *text, rsc_scenario **out);
rsc_status rsc_scenario_from_file(const char *path, rsc_scenario **out);
/// Override one field, same syntax as a config line.
rsc_status rsc_scenario_set(rsc_scenario *s, const char *key, const char *value);
int rsc_scenario_dimension(const rsc_scenario *s);
int rsc_scenario_trials(const rsc_scenario *s);
void rsc_scenario_free(rsc_scenario *s);

/// axis: dimension | alpha | xi | k | t_df. estimators: comma-separated
/// method specs. metric: frobenius (default when NULL) | logfro.
/// trials <= 0 uses the scenario's trial count.
rsc_status rsc_sweep_run(const rsc_scenario *s, const char *axis, const double *grid,
                         int grid_len, const char *estimators, int trials, const char *metric,
                         int fixed_sigma, rsc_sweep **out);
int rsc_sweep_rows(const rsc_sweep *s);
/// One CSV row; the estimator pointer stays valid while the sweep lives.
rsc_status rsc_sweep_cell(const rsc_sweep *s, int row, double *axis_value,
                          const char **estimator, double *rmse, int *trials_ok,
                          int *trials_failed);
rsc_status rsc_sweep_write_csv(const rsc_sweep *s, const char *path);
void rsc_sweep_free(rsc_sweep *s);

/* ---- breakdown probes ---- */

/// contamination: "zeros" or "cluster" (cluster_norm used only for the
/// latter). One probe per entry of m_grid; trials <= 0 means 20.
rsc_status rsc_breakdown_run(int n_good, int p, const char *weight, double alpha,
                             const char *contamination, double cluster_norm, const int *m_grid,
                             int m_len, int trials, uint64_t seed, rsc_breakdown **out);
int rsc_breakdown_rows(const rsc_breakdown *b);
rsc_status rsc_breakdown_row(const rsc_breakdown *b, int row, double *epsilon_m,
                             const char **status, int *count, double *lambda_max,
                             double *threshold_lo, double *threshold_hi);
rsc_status rsc_breakdown_write_csv(const rsc_breakdown *b, const char *path);
void rsc_breakdown_free(rsc_breakdown *b);

/* ---- diagnostics ---- */

/// Indices of the data rows by descending squared Mahalanobis distance under
/// v. indices and distances hold n entries each; distances may be NULL.
rsc_status rsc_rank(const rsc_dataset *data, const rsc_matrix *v, int *indices,
                    double *distances, int n);

#ifdef __cplusplus
}
#endif

#endif /* ROBUSTSCATTER_H */
