#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "linalg.hpp"

namespace rsc {

struct MomentEstimates {
  Matrix m1;                 // mean of C_P^{-1} over usable resamples
  double m2 = 0.0;           // mean of ||C_P^{-1}||_F^2
  int replicates = 0;        // B requested
  int resample_size = 0;
  int degenerate_count = 0;  // resamples whose C_P was singular, skipped
};

// Tyler-weighted scatter at a precision candidate: (p/n) sum x x^T / (x^T M x)
// with n the number of rows actually summed (the resample size).
SpdMatrix c_p_matrix(const DataSet& x, const SpdMatrix& m);

// Expected draws to collect k distinct coupons out of n: n * sum_{i=n-k+1}^n 1/i.
double coupon_resamples(int n, int k);

// B with-replacement resamples of the given size; per-replicate substreams
// keyed by (seed, replicate). index_override is a test hook supplying the
// resample index sets directly.
MomentEstimates bootstrap_moments(const DataSet& x, const SpdMatrix& m2_candidate, int b,
                                  int resample_size, std::uint64_t seed,
                                  const std::vector<std::vector<int>>* index_override = nullptr);

// Plug-in shrinkage coefficient from the bootstrap moments, clamped to [0,1];
// the unclamped solution lands in *raw_out when requested.
double alpha_from_moments(const SpdMatrix& m2_candidate, const MomentEstimates& m, int p,
                          double* raw_out = nullptr);

enum class M2Source { scm_inverse, tme_inverse, user };

struct AlphaSelection {
  double alpha = 0.0;  // clamped
  double raw = 0.0;    // before clamping
  int resample_size = 0;
  MomentEstimates moments;
};

// Full pipeline: M2 construction, coupon-sized bootstrap, moment plug-in.
// user_m2 is consulted only for M2Source::user (oracle test hook).
AlphaSelection select_alpha(const DataSet& x, M2Source source, int b, std::uint64_t seed,
                            const SpdMatrix* user_m2 = nullptr);

double alpha_hat(const DataSet& x, M2Source source, int b, std::uint64_t seed,
                 const SpdMatrix* user_m2 = nullptr);

constexpr int kDefaultBootstrapReplicates = 200;

}  // namespace rsc
