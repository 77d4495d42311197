#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "linalg.hpp"

namespace rsc {

enum class OutlierMode { none, unclustered, clustered };
enum class BodyFamily { gaussian, t_dist };

const char* to_string(OutlierMode m);
const char* to_string(BodyFamily b);

// Full simulation configuration. trace, c1 and c2 default to p, 1/p and 1
// when left unset, re-resolving as p changes across a dimension sweep.
struct Scenario {
  int p = 5;
  double trace = 0.0;  // <= 0 means unset
  double c1 = 0.0;
  double c2 = 0.0;
  int N = 100;
  double xi = 0.0;  // outlier ratio, in [0, 1)
  double k = 10.0;  // Mahalanobis multiple for outlier placement
  OutlierMode outlier_mode = OutlierMode::none;
  BodyFamily body = BodyFamily::gaussian;
  int t_df = 5;  // body degrees of freedom when body == t_dist
  int trials = 200;
  std::uint64_t seed = 1;

  double trace_value() const { return trace > 0.0 ? trace : static_cast<double>(p); }
  double c1_value() const { return c1 > 0.0 ? c1 : 1.0 / static_cast<double>(p); }
  double c2_value() const { return c2 > 0.0 ? c2 : 1.0; }
  int outlier_count() const;  // ceil(N * xi), 0 when outlier_mode == none
  int body_count() const { return N - outlier_count(); }

  void validate() const;
};

// Flat key/value config (key = value, '#' comments). Keys are exactly the
// Scenario field names; unknown keys are rejected.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& scn);

// Rejection-sampled Dirichlet spread for p > 4; the p <= 4 extension places
// (c1, equal middles, c1/c2) rescaled onto the simplex. Descending.
std::vector<double> contribution_ratios(int p, double c1, double c2, std::uint64_t seed);

Matrix random_orthonormal(int p, std::uint64_t seed);

// Q diag(trace * ratios) Q^T; trial varies the draw under the scenario seed.
SpdMatrix make_sigma(const Scenario& scn, std::uint64_t trial = 0);

DataSet sample_gaussian(int n, const SpdMatrix& sigma, std::uint64_t seed);

// Elliptical t: x = L z / sqrt(u/df). forced_u (tests) bypasses the
// chi-square draws; forcing u = df reduces every row to the Gaussian draw.
DataSet sample_t(int n, const SpdMatrix& sigma, int df, std::uint64_t seed,
                 const std::vector<double>* forced_u = nullptr);

double mean_sq_mahalanobis(const DataSet& x, const SpdMatrix& sigma);

// m rows, each t*u with u uniform on the sphere and t solving the Mahalanobis
// constraint z^T sigma^{-1} z = target.
Matrix outliers_unclustered(int m, const SpdMatrix& sigma, double target, std::uint64_t seed);

struct ClusteredOutliers {
  Matrix members;  // m x p
  Vector center;   // mu_o, itself satisfying the Mahalanobis constraint
};

ClusteredOutliers outliers_clustered(int m, const SpdMatrix& sigma, double target,
                                     std::uint64_t seed);

struct ScenarioDraw {
  DataSet data;
  SpdMatrix sigma;
};

// Body sample of size N - m with the outliers appended last and their indices
// recorded. sigma_override (sweeps' --fixed-sigma) skips the per-trial
// sigma draw.
ScenarioDraw scenario_dataset(const Scenario& scn, std::uint64_t trial,
                              const SpdMatrix* sigma_override = nullptr);

}  // namespace rsc
