// rsc: scatter-matrix estimation and simulation front end. Talks to the
// library exclusively through the public C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robustscatter.h"

namespace {

template <class T, void (*F)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) F(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};

using DatasetHandle = Handle<rsc_dataset, rsc_dataset_free>;
using MatrixHandle = Handle<rsc_matrix, rsc_matrix_free>;
using ResultHandle = Handle<rsc_result, rsc_result_free>;
using ScenarioHandle = Handle<rsc_scenario, rsc_scenario_free>;
using SweepHandle = Handle<rsc_sweep, rsc_sweep_free>;
using BreakdownHandle = Handle<rsc_breakdown, rsc_breakdown_free>;

// 2 = configuration problem, 3 = numerical failure.
int exit_for(rsc_status st) {
  switch (st) {
    case RSC_OK: return 0;
    case RSC_ERR_INVALID_INPUT:
    case RSC_ERR_SINGULAR:
    case RSC_ERR_DEGENERATE:
    case RSC_ERR_NUMERIC: return 3;
    default: return 2;
  }
}

int report(rsc_status st) {
  std::fprintf(stderr, "error: %s\n", rsc_last_error());
  return exit_for(st);
}

std::string compose_method(const std::string& method, const std::string& alpha,
                           const std::string& weight) {
  std::string spec = method;
  if (!alpha.empty()) spec += ":" + alpha;
  if (!weight.empty()) spec += "@" + weight;
  return spec;
}

bool parse_grid(const std::string& text, std::vector<double>* out) {
  std::string::size_type start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string tok =
        comma == std::string::npos ? text.substr(start) : text.substr(start, comma - start);
    try {
      std::size_t used = 0;
      out->push_back(std::stod(tok, &used));
      if (used != tok.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return !out->empty();
}

struct EstimateArgs {
  std::string input;
  std::string method;
  std::string weight;
  std::string alpha;
  std::string output;
  std::string alpha_m2 = "scm";
  double epsilon = 1e-6;
  int max_iter = 1000;
  int bootstrap = 200;
  std::uint64_t seed = 1;
  bool skip_header = false;
};

void add_estimate_options(CLI::App* cmd, EstimateArgs* a, bool need_output) {
  cmd->add_option("--input", a->input, "input CSV, rows = observations")->required();
  cmd->add_option("--method", a->method, "estimator name")->required();
  cmd->add_option("--weight", a->weight, "weight spec: tyler|huber:<c>|t:<nu>|const:<beta>");
  cmd->add_option("--alpha", a->alpha, "shrinkage coefficient or `auto`");
  cmd->add_option("--epsilon", a->epsilon, "stopping tolerance")->capture_default_str();
  cmd->add_option("--max-iter", a->max_iter, "iteration budget")->capture_default_str();
  cmd->add_option("--alpha-m2", a->alpha_m2, "M2 for alpha=auto: scm or tme")
      ->check(CLI::IsMember({"scm", "tme"}))
      ->capture_default_str();
  cmd->add_option("--bootstrap", a->bootstrap, "alpha=auto bootstrap replicates")
      ->capture_default_str();
  cmd->add_option("--seed", a->seed, "alpha=auto bootstrap seed")->capture_default_str();
  cmd->add_flag("--skip-header", a->skip_header, "drop the first CSV line");
  if (need_output) cmd->add_option("--output", a->output, "estimate CSV path")->required();
}

// Shared by `estimate` and `rank`: load data, run the estimator, hand back
// the converged estimate.
int run_estimate(const EstimateArgs& a, DatasetHandle* data, ResultHandle* res,
                 MatrixHandle* est) {
  rsc_status st = rsc_dataset_from_csv(a.input.c_str(), a.skip_header ? 1 : 0, data->out());
  if (st != RSC_OK) return report(st);

  rsc_solver_config cfg;
  rsc_solver_config_init(&cfg);
  cfg.epsilon = a.epsilon;
  cfg.max_iter = a.max_iter;
  cfg.bootstrap_replicates = a.bootstrap;
  cfg.alpha_m2 = a.alpha_m2 == "tme" ? 1 : 0;
  cfg.alpha_seed = a.seed;

  const std::string spec = compose_method(a.method, a.alpha, a.weight);
  st = rsc_estimate(data->get(), spec.c_str(), &cfg, res->out());
  if (st != RSC_OK) return report(st);

  if (!rsc_result_converged(res->get())) {
    std::fprintf(stderr, "error: estimator did not converge: %s after %d iterations\n",
                 rsc_result_status_name(res->get()), rsc_result_iterations(res->get()));
    return 3;
  }
  st = rsc_result_estimate(res->get(), est->out());
  if (st != RSC_OK) return report(st);
  return 0;
}

int cmd_estimate(const EstimateArgs& a) {
  DatasetHandle data;
  ResultHandle res;
  MatrixHandle est;
  const int rc = run_estimate(a, &data, &res, &est);
  if (rc != 0) return rc;
  const rsc_status st = rsc_matrix_write_csv(est.get(), a.output.c_str());
  if (st != RSC_OK) return report(st);
  std::printf("status=%s iterations=%d residual=%.6g lambda_max=%.6g lambda_min=%.6g\n",
              rsc_result_status_name(res.get()), rsc_result_iterations(res.get()),
              rsc_result_residual(res.get()), rsc_result_lambda_max(res.get()),
              rsc_result_lambda_min(res.get()));
  return 0;
}

int print_sweep(const rsc_sweep* sw) {
  const int rows = rsc_sweep_rows(sw);
  for (int i = 0; i < rows; ++i) {
    double axis_value = 0.0, rmse = 0.0;
    const char* est = nullptr;
    int ok = 0, failed = 0;
    if (rsc_sweep_cell(sw, i, &axis_value, &est, &rmse, &ok, &failed) != RSC_OK)
      return report(RSC_ERR_UNKNOWN);
    std::printf("%-14g %-24s rmse=%-12.6g ok=%-4d failed=%d\n", axis_value, est, rmse, ok,
                failed);
  }
  return 0;
}

int cmd_simulate(const std::string& config, const std::string& estimators, int trials,
                 const std::string& out, const std::string& metric, bool fixed_sigma,
                 std::uint64_t seed, bool seed_set) {
  ScenarioHandle scn;
  rsc_status st = rsc_scenario_from_file(config.c_str(), scn.out());
  if (st != RSC_OK) return report(st);
  if (seed_set) {
    st = rsc_scenario_set(scn.get(), "seed", std::to_string(seed).c_str());
    if (st != RSC_OK) return report(st);
  }
  const double grid[1] = {static_cast<double>(rsc_scenario_dimension(scn.get()))};
  SweepHandle sw;
  st = rsc_sweep_run(scn.get(), "dimension", grid, 1, estimators.c_str(), trials,
                     metric.empty() ? nullptr : metric.c_str(), fixed_sigma ? 1 : 0, sw.out());
  if (st != RSC_OK) return report(st);
  st = rsc_sweep_write_csv(sw.get(), out.c_str());
  if (st != RSC_OK) return report(st);
  return print_sweep(sw.get());
}

int cmd_sweep(const std::string& config, const std::string& axis, const std::string& grid_text,
              std::string estimators, int trials, const std::string& out,
              const std::string& metric, bool fixed_sigma, std::uint64_t seed, bool seed_set) {
  std::vector<double> grid;
  if (!parse_grid(grid_text, &grid)) {
    std::fprintf(stderr, "error: bad --grid value '%s'\n", grid_text.c_str());
    return 2;
  }
  if (estimators.empty())
    estimators = axis == "alpha" ? "scm,tme,sscm,identity,lnsmi,proposed"
                                 : "scm,tme,sscm,lnsmi:0.05,proposed:auto";
  ScenarioHandle scn;
  rsc_status st = rsc_scenario_from_file(config.c_str(), scn.out());
  if (st != RSC_OK) return report(st);
  if (seed_set) {
    st = rsc_scenario_set(scn.get(), "seed", std::to_string(seed).c_str());
    if (st != RSC_OK) return report(st);
  }
  SweepHandle sw;
  st = rsc_sweep_run(scn.get(), axis.c_str(), grid.data(), static_cast<int>(grid.size()),
                     estimators.c_str(), trials, metric.empty() ? nullptr : metric.c_str(),
                     fixed_sigma ? 1 : 0, sw.out());
  if (st != RSC_OK) return report(st);
  st = rsc_sweep_write_csv(sw.get(), out.c_str());
  if (st != RSC_OK) return report(st);
  std::printf("wrote %d rows to %s\n", rsc_sweep_rows(sw.get()), out.c_str());
  return 0;
}

int cmd_breakdown(int p, int n, const std::string& weight, double alpha,
                  const std::string& contamination, const std::string& m_grid_text,
                  double cluster_norm, int trials, std::uint64_t seed, const std::string& out) {
  std::vector<double> grid;
  if (!parse_grid(m_grid_text, &grid)) {
    std::fprintf(stderr, "error: bad --m-grid value '%s'\n", m_grid_text.c_str());
    return 2;
  }
  std::vector<int> m_grid;
  for (double v : grid) {
    const int m = static_cast<int>(v);
    if (v != m || m < 0) {
      std::fprintf(stderr, "error: --m-grid entries must be nonnegative integers\n");
      return 2;
    }
    m_grid.push_back(m);
  }
  BreakdownHandle rep;
  rsc_status st =
      rsc_breakdown_run(n, p, weight.c_str(), alpha, contamination.c_str(), cluster_norm,
                        m_grid.data(), static_cast<int>(m_grid.size()), trials, seed, rep.out());
  if (st != RSC_OK) return report(st);
  st = rsc_breakdown_write_csv(rep.get(), out.c_str());
  if (st != RSC_OK) return report(st);
  const int rows = rsc_breakdown_rows(rep.get());
  for (int i = 0; i < rows; ++i) {
    double eps = 0.0, lmax = 0.0, lo = 0.0, hi = 0.0;
    const char* status = nullptr;
    int count = 0;
    rsc_breakdown_row(rep.get(), i, &eps, &status, &count, &lmax, &lo, &hi);
    std::printf("epsilon_m=%-10.4g %-22s count=%-4d lambda_max=%.6g\n", eps, status, count, lmax);
  }
  return 0;
}

int cmd_rank(const EstimateArgs& a, int top, const std::string& output) {
  DatasetHandle data;
  ResultHandle res;
  MatrixHandle est;
  const int rc = run_estimate(a, &data, &res, &est);
  if (rc != 0) return rc;
  const int n = rsc_dataset_rows(data.get());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  const rsc_status st = rsc_rank(data.get(), est.get(), idx.data(), dist.data(), n);
  if (st != RSC_OK) return report(st);

  const int limit = (top > 0 && top < n) ? top : n;
  std::FILE* f = stdout;
  if (!output.empty()) {
    f = std::fopen(output.c_str(), "wb");
    if (!f) {
      std::fprintf(stderr, "error: cannot open output file: %s\n", output.c_str());
      return 2;
    }
  }
  std::fprintf(f, "rank,index,distance\n");
  for (int i = 0; i < limit; ++i)
    std::fprintf(f, "%d,%d,%.12g\n", i + 1, idx[static_cast<std::size_t>(i)],
                 dist[static_cast<std::size_t>(i)]);
  if (f != stdout) std::fclose(f);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust scatter-matrix estimation and simulation"};
  app.require_subcommand(1);

  EstimateArgs est_args;
  auto* est = app.add_subcommand("estimate", "estimate a scatter matrix from CSV data");
  add_estimate_options(est, &est_args, true);

  std::string sim_config, sim_estimators, sim_out, sim_metric;
  int sim_trials = 0;
  bool sim_fixed = false;
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "run one scenario and report RMSE per estimator");
  sim->add_option("--config", sim_config, "scenario config file")->required();
  sim->add_option("--estimators", sim_estimators, "comma-separated method specs")->required();
  sim->add_option("--trials", sim_trials, "trial count; 0 = scenario value");
  sim->add_option("--out", sim_out, "output CSV")->required();
  sim->add_option("--metric", sim_metric, "frobenius or logfro")
      ->check(CLI::IsMember({"frobenius", "logfro"}));
  sim->add_flag("--fixed-sigma", sim_fixed, "pin Sigma to the trial-0 draw");
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "override the scenario seed");

  std::string sw_config, sw_axis, sw_grid, sw_estimators, sw_out, sw_metric;
  int sw_trials = 0;
  bool sw_fixed = false;
  std::uint64_t sw_seed = 0;
  auto* sw = app.add_subcommand("sweep", "sweep one scenario knob over a grid");
  sw->add_option("--config", sw_config, "scenario config file")->required();
  sw->add_option("--axis", sw_axis, "dimension|alpha|xi|k|t_df")
      ->required()
      ->check(CLI::IsMember({"dimension", "alpha", "xi", "k", "t_df"}));
  sw->add_option("--grid", sw_grid, "comma-separated grid values")->required();
  sw->add_option("--estimators", sw_estimators, "comma-separated method specs");
  sw->add_option("--trials", sw_trials, "trial count; 0 = scenario value");
  sw->add_option("--out", sw_out, "output CSV")->required();
  sw->add_option("--metric", sw_metric, "frobenius or logfro")
      ->check(CLI::IsMember({"frobenius", "logfro"}));
  sw->add_flag("--fixed-sigma", sw_fixed, "pin Sigma to the trial-0 draw per grid point");
  auto* sw_seed_opt = sw->add_option("--seed", sw_seed, "override the scenario seed");

  int bd_p = 2, bd_n = 20, bd_trials = 20;
  double bd_alpha = 0.0, bd_norm = 1e6;
  std::string bd_weight, bd_cont, bd_m_grid, bd_out;
  std::uint64_t bd_seed = 1;
  auto* bd = app.add_subcommand("breakdown", "existence probes under contamination");
  bd->add_option("--p", bd_p, "dimension")->required();
  bd->add_option("--n", bd_n, "good sample count")->required();
  bd->add_option("--weight", bd_weight, "weight spec, e.g. huber:4")->required();
  bd->add_option("--alpha", bd_alpha, "shrinkage coefficient")->capture_default_str();
  bd->add_option("--contamination", bd_cont, "zeros or cluster")
      ->required()
      ->check(CLI::IsMember({"zeros", "cluster"}));
  bd->add_option("--m-grid", bd_m_grid, "comma-separated outlier counts")->required();
  bd->add_option("--cluster-norm", bd_norm, "cluster center distance")->capture_default_str();
  bd->add_option("--trials", bd_trials, "trials per grid point")->capture_default_str();
  bd->add_option("--seed", bd_seed, "PRNG seed")->capture_default_str();
  bd->add_option("--out", bd_out, "output CSV")->required();

  EstimateArgs rank_args;
  int rank_top = 0;
  std::string rank_out;
  auto* rank = app.add_subcommand("rank", "rank rows by Mahalanobis distance under an estimate");
  add_estimate_options(rank, &rank_args, false);
  rank->add_option("--top", rank_top, "print only the top N rows");
  rank->add_option("--output", rank_out, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (est->parsed()) return cmd_estimate(est_args);
  if (sim->parsed())
    return cmd_simulate(sim_config, sim_estimators, sim_trials, sim_out, sim_metric, sim_fixed,
                        sim_seed, sim_seed_opt->count() > 0);
  if (sw->parsed())
    return cmd_sweep(sw_config, sw_axis, sw_grid, sw_estimators, sw_trials, sw_out, sw_metric,
                     sw_fixed, sw_seed, sw_seed_opt->count() > 0);
  if (bd->parsed())
    return cmd_breakdown(bd_p, bd_n, bd_weight, bd_alpha, bd_cont, bd_m_grid, bd_norm, bd_trials,
                         bd_seed, bd_out);
  if (rank->parsed()) return cmd_rank(rank_args, rank_top, rank_out);
  return 2;
}
