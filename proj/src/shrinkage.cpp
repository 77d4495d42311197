#include "shrinkage.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "errors.hpp"
#include "estimators.hpp"
#include "rng.hpp"
#include "weights.hpp"

namespace rsc {

SpdMatrix c_p_matrix(const DataSet& x, const SpdMatrix& m) {
  if (x.n() < 1) fail(errc::invalid_input, "empty dataset");
  if (m.dim() != x.p()) fail(errc::invalid_argument, "dimension mismatch");
  if (!m.strictly_pd()) fail(errc::invalid_argument, "precision candidate must be PD");
  const Matrix& rows = x.rows();
  const Eigen::Index n = x.n();
  const double p = static_cast<double>(x.p());
  Matrix b = rows * m.mat();
  Matrix c = Matrix::Zero(x.p(), x.p());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = b.row(i).dot(rows.row(i));
    if (!(s > 0.0)) fail(errc::invalid_input, "zero row has no Tyler weight");
    c.noalias() += rows.row(i).transpose() * rows.row(i) / s;
  }
  c *= p / static_cast<double>(n);
  return SpdMatrix(0.5 * (c + c.transpose()));
}

double coupon_resamples(int n, int k) {
  if (n < 1) fail(errc::domain, "need at least one coupon");
  if (k < 1 || k > n) fail(errc::domain, "k must lie in [1, n]");
  // Ascending summands: i runs n down to n-k+1.
  double sum = 0.0;
  for (int i = n; i >= n - k + 1; --i) sum += 1.0 / static_cast<double>(i);
  return static_cast<double>(n) * sum;
}

MomentEstimates bootstrap_moments(const DataSet& x, const SpdMatrix& m2_candidate, int b,
                                  int resample_size, std::uint64_t seed,
                                  const std::vector<std::vector<int>>* index_override) {
  if (b < 1) fail(errc::invalid_argument, "need at least one replicate");
  if (resample_size < x.p() + 1)
    fail(errc::invalid_argument, "resample_size must exceed the dimension");
  if (index_override && static_cast<int>(index_override->size()) != b)
    fail(errc::invalid_argument, "index_override must supply one index set per replicate");
  const Matrix& rows = x.rows();
  const Eigen::Index p = x.p();

  MomentEstimates out;
  out.replicates = b;
  out.resample_size = resample_size;
  Matrix sum_m1 = Matrix::Zero(p, p);
  double sum_m2 = 0.0;
  int usable = 0;
  for (int rep = 0; rep < b; ++rep) {
    std::vector<int> idx;
    if (index_override) {
      idx = (*index_override)[rep];
      if (static_cast<int>(idx.size()) != resample_size)
        fail(errc::invalid_argument, "index_override sets must match resample_size");
    } else {
      std::mt19937_64 gen = substream(seed, kStageAlphaBoot, static_cast<std::uint64_t>(rep));
      std::uniform_int_distribution<int> pick(0, static_cast<int>(x.n()) - 1);
      idx.resize(resample_size);
      for (int& v : idx) v = pick(gen);
    }
    Matrix sub(static_cast<Eigen::Index>(idx.size()), p);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= x.n()) fail(errc::invalid_argument, "resample index out of range");
      sub.row(static_cast<Eigen::Index>(i)) = rows.row(idx[i]);
    }
    try {
      SpdMatrix cp = c_p_matrix(DataSet(std::move(sub)), m2_candidate);
      SpdMatrix inv = spd_inverse(cp);
      sum_m1 += inv.mat();
      sum_m2 += inv.mat().squaredNorm();
      ++usable;
    } catch (const Error&) {
      ++out.degenerate_count;  // rank-deficient resample; excluded
    }
  }
  if (usable == 0) fail(errc::degenerate, "every bootstrap resample was singular");
  out.m1 = sum_m1 / static_cast<double>(usable);
  out.m2 = sum_m2 / static_cast<double>(usable);
  return out;
}

double alpha_from_moments(const SpdMatrix& m2_candidate, const MomentEstimates& m, int p,
                          double* raw_out) {
  if (m.m1.rows() != p || m.m1.cols() != p || m2_candidate.dim() != p)
    fail(errc::invalid_argument, "dimension mismatch");
  const double tr_m2 = m2_candidate.mat().trace();
  const double tr_m1 = m.m1.trace();
  const double tr_cross = (m.m1 * m2_candidate.mat()).trace();
  const double num = tr_m2 - tr_m1 - tr_cross + m.m2;
  const double den = static_cast<double>(p) - 2.0 * tr_m1 + m.m2;
  if (std::abs(den) < 1e-12)
    fail(errc::degenerate, "degenerate denominator: moments indistinguishable from identity");
  const double raw = num / den;
  if (raw_out) *raw_out = raw;
  return std::clamp(raw, 0.0, 1.0);
}

namespace {

SpdMatrix default_m2(const DataSet& x) {
  // Cheapest PD precision surrogate; identity when the SCM has no inverse.
  try {
    return spd_inverse(trace_normalize(scm(x)));
  } catch (const Error&) {
    return SpdMatrix::identity(x.p());
  }
}

SpdMatrix tme_m2(const DataSet& x) {
  SolverConfig cfg;
  EstimatorResult r = m_fixed_point(x, WeightFunction::tyler(static_cast<int>(x.p())), cfg);
  if (!r.estimate || !r.estimate->strictly_pd())
    fail(errc::degenerate, "TME unavailable for M2; use the scm source");
  return spd_inverse(*r.estimate);
}

}  // namespace

AlphaSelection select_alpha(const DataSet& x, M2Source source, int b, std::uint64_t seed,
                            const SpdMatrix* user_m2) {
  if (x.n() < 2) fail(errc::invalid_input, "too few observations");
  const int n = static_cast<int>(x.n());
  const int k = static_cast<int>(std::ceil(0.975 * n));
  const int resample_size = static_cast<int>(std::lround(coupon_resamples(n, k)));

  SpdMatrix m2 = SpdMatrix::identity(x.p());
  switch (source) {
    case M2Source::scm_inverse: m2 = default_m2(x); break;
    case M2Source::tme_inverse: m2 = tme_m2(x); break;
    case M2Source::user:
      if (!user_m2) fail(errc::invalid_argument, "user M2 source requires a matrix");
      if (!user_m2->strictly_pd()) fail(errc::invalid_argument, "user M2 must be PD");
      m2 = *user_m2;
      break;
  }

  AlphaSelection sel;
  sel.resample_size = resample_size;
  sel.moments = bootstrap_moments(x, m2, b, resample_size, seed);
  sel.alpha = alpha_from_moments(m2, sel.moments, static_cast<int>(x.p()), &sel.raw);
  return sel;
}

double alpha_hat(const DataSet& x, M2Source source, int b, std::uint64_t seed,
                 const SpdMatrix* user_m2) {
  return select_alpha(x, source, b, seed, user_m2).alpha;
}

}  // namespace rsc
