#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dataset.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "estimators.hpp"
#include "linalg.hpp"
#include "rng.hpp"
#include "shrinkage.hpp"

using rsc::DataSet;
using rsc::Matrix;
using rsc::MomentEstimates;
using rsc::SpdMatrix;
using rsc::Vector;

namespace {

DataSet gaussian_data(int n, const Matrix& sigma, std::uint64_t seed) {
  auto gen = rsc::substream(seed);
  std::normal_distribution<double> nd;
  Eigen::LLT<Matrix> llt(sigma);
  REQUIRE(llt.info() == Eigen::Success);
  Matrix l = llt.matrixL();
  Matrix z(n, sigma.rows());
  for (int i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < sigma.rows(); ++j) z(i, j) = nd(gen);
  return DataSet(Matrix(z * l.transpose()));
}

}  // namespace

TEST_CASE("c_p_matrix closed form and scale invariance") {
  Matrix rows(2, 2);
  rows << 1, 0, 0, 1;
  DataSet axes{rows};
  SpdMatrix i2 = SpdMatrix::identity(2);
  CHECK((rsc::c_p_matrix(axes, i2).mat() - Matrix::Identity(2, 2)).norm() <
        1e-14);

  DataSet g = gaussian_data(30, Matrix::Identity(3, 3), 201);
  DataSet g10(Matrix(10.0 * g.rows()));
  SpdMatrix i3 = SpdMatrix::identity(3);
  CHECK((rsc::c_p_matrix(g, i3).mat() - rsc::c_p_matrix(g10, i3).mat())
            .norm() < 1e-12);
}

TEST_CASE("c_p_matrix trace identity at the candidate precision") {
  // Tr[C_P M] = p exactly, so with M = Sigma^{-1} = I the trace concentrates
  // near p; here the identity itself is checked on every dataset.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DataSet g = gaussian_data(40, Matrix::Identity(3, 3), 202 + seed);
    SpdMatrix cp = rsc::c_p_matrix(g, SpdMatrix::identity(3));
    CHECK(cp.mat().trace() == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("c_p_matrix rejects zero rows") {
  Matrix rows = Matrix::Zero(3, 2);
  rows(0, 0) = 1;
  rows(1, 1) = 1;
  CHECK_THROWS_AS(rsc::c_p_matrix(DataSet(rows), SpdMatrix::identity(2)),
                  rsc::Error);
}

TEST_CASE("coupon_resamples harmonic values") {
  CHECK(rsc::coupon_resamples(1, 1) == doctest::Approx(1.0));
  CHECK(rsc::coupon_resamples(2, 2) == doctest::Approx(3.0));
  // n * (1/3 + 1/4 + ... + 1/100), computed independently to full precision.
  CHECK(rsc::coupon_resamples(100, 98) ==
        doctest::Approx(368.737751763962).epsilon(1e-12));
  CHECK_THROWS_AS(rsc::coupon_resamples(3, 4), rsc::Error);
  CHECK_THROWS_AS(rsc::coupon_resamples(3, 0), rsc::Error);
}

TEST_CASE("coupon_resamples is strictly increasing and superlinear near k=n") {
  double prev = 0.0;
  std::vector<double> diffs;
  for (int k = 1; k <= 100; ++k) {
    double v = rsc::coupon_resamples(100, k);
    CHECK(v > prev);
    diffs.push_back(v - prev);
    prev = v;
  }
  // Marginal cost of one more distinct coupon grows: the last step costs
  // n/1 = 100 draws, the first costs 1.
  CHECK(diffs.front() == doctest::Approx(1.0));
  CHECK(diffs.back() == doctest::Approx(100.0));
  for (std::size_t i = 1; i < diffs.size(); ++i) CHECK(diffs[i] > diffs[i - 1]);
}

TEST_CASE("bootstrap_moments with a forced full resample is deterministic") {
  DataSet g = gaussian_data(25, Matrix::Identity(3, 3), 203);
  SpdMatrix m2 = SpdMatrix::identity(3);
  std::vector<std::vector<int>> idx(1);
  idx[0].resize(25);
  std::iota(idx[0].begin(), idx[0].end(), 0);
  MomentEstimates m = rsc::bootstrap_moments(g, m2, 1, 25, 204, &idx);
  REQUIRE(m.replicates == 1);
  CHECK(m.degenerate_count == 0);
  Matrix want = rsc::spd_inverse(rsc::c_p_matrix(g, m2)).mat();
  CHECK((m.m1 - want).norm() == 0.0);
  CHECK(m.m2 == doctest::Approx(want.squaredNorm()).epsilon(1e-15));
}

TEST_CASE("bootstrap moments obey the Jensen inequality with slack") {
  DataSet g = gaussian_data(40, Matrix::Identity(3, 3), 205);
  SpdMatrix m2 = SpdMatrix::identity(3);
  MomentEstimates m = rsc::bootstrap_moments(g, m2, 50, 60, 206);
  CHECK(m.m2 >= m.m1.squaredNorm() - 1e-6 * m.m2);
}

TEST_CASE("bootstrap_moments is bit-reproducible") {
  DataSet g = gaussian_data(30, Matrix::Identity(3, 3), 207);
  SpdMatrix m2 = SpdMatrix::identity(3);
  MomentEstimates a = rsc::bootstrap_moments(g, m2, 25, 40, 208);
  MomentEstimates b = rsc::bootstrap_moments(g, m2, 25, 40, 208);
  CHECK((a.m1 - b.m1).norm() == 0.0);
  CHECK(a.m2 == b.m2);
  CHECK(a.degenerate_count == b.degenerate_count);
}

TEST_CASE("duplicating the dataset leaves the resample law unchanged") {
  // Resampling rows i.i.d. uniformly from X and from X concatenated with
  // itself draws from the same distribution; the bootstrap means must agree
  // within Monte Carlo error. sigma estimated from the replicate spread.
  DataSet x = gaussian_data(30, Matrix::Identity(2, 2), 209);
  Matrix doubled(60, 2);
  doubled.topRows(30) = x.rows();
  doubled.bottomRows(30) = x.rows();
  DataSet xx{doubled};
  SpdMatrix m2 = SpdMatrix::identity(2);
  const int b = 500;
  MomentEstimates ma = rsc::bootstrap_moments(x, m2, b, 40, 210);
  MomentEstimates mb = rsc::bootstrap_moments(xx, m2, b, 40, 211);

  // Spread of single-replicate m2 values, for a 3 sigma band on the mean.
  std::vector<double> singles;
  for (int r = 0; r < 60; ++r)
    singles.push_back(
        rsc::bootstrap_moments(x, m2, 1, 40, 3000 + r).m2);
  double mean = std::accumulate(singles.begin(), singles.end(), 0.0) / singles.size();
  double var = 0.0;
  for (double v : singles) var += (v - mean) * (v - mean);
  var /= (singles.size() - 1);
  double se = std::sqrt(var / b) * std::sqrt(2.0);  // both means fluctuate
  CHECK(std::abs(ma.m2 - mb.m2) < 3.0 * se + 1e-12);
}

TEST_CASE("degenerate resamples are counted and skipped") {
  DataSet g = gaussian_data(20, Matrix::Identity(2, 2), 212);
  SpdMatrix m2 = SpdMatrix::identity(2);
  std::vector<std::vector<int>> idx;
  idx.push_back(std::vector<int>(30, 0));  // all rows identical: rank-1 C_P
  std::vector<int> fine(30);
  for (int i = 0; i < 30; ++i) fine[i] = i % 20;
  idx.push_back(fine);
  MomentEstimates m = rsc::bootstrap_moments(g, m2, 2, 30, 213, &idx);
  CHECK(m.degenerate_count == 1);
  // Index sets must match the requested resample size when overridden.
  std::vector<std::vector<int>> wrong = {{0, 1}};
  CHECK_THROWS_AS(rsc::bootstrap_moments(g, m2, 1, 30, 213, &wrong), rsc::Error);

  std::vector<std::vector<int>> allbad = {std::vector<int>(30, 3)};
  CHECK_THROWS_AS(rsc::bootstrap_moments(g, m2, 1, 30, 214, &allbad), rsc::Error);
}

TEST_CASE("alpha_from_moments oracle and degenerate cases") {
  Matrix om(2, 2);
  om << 2, 0.3, 0.3, 0.6;
  SpdMatrix omega{om};
  MomentEstimates exact;
  exact.m1 = om;
  exact.m2 = om.squaredNorm();
  exact.replicates = 1;
  double raw = -1.0;
  double a = rsc::alpha_from_moments(omega, exact, 2, &raw);
  CHECK(a == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(raw == doctest::Approx(0.0).epsilon(1e-12));

  MomentEstimates degen;
  degen.m1 = Matrix::Identity(2, 2);
  degen.m2 = 2.0;
  CHECK_THROWS_AS(rsc::alpha_from_moments(omega, degen, 2, nullptr), rsc::Error);
}

TEST_CASE("alpha_from_moments is invariant under joint permutation similarity") {
  Matrix om(3, 3);
  om << 2, 0.3, 0.1, 0.3, 1.1, 0.0, 0.1, 0.0, 0.6;
  MomentEstimates m;
  Matrix m1(3, 3);
  m1 << 1.9, 0.2, 0.1, 0.2, 1.0, 0.05, 0.1, 0.05, 0.7;
  m.m1 = m1;
  m.m2 = 9.4;
  double raw_base = 0.0;
  rsc::alpha_from_moments(SpdMatrix(om), m, 3, &raw_base);

  // Cyclic permutation matrix.
  Matrix perm = Matrix::Zero(3, 3);
  perm(0, 1) = perm(1, 2) = perm(2, 0) = 1;
  MomentEstimates mp = m;
  mp.m1 = perm * m1 * perm.transpose();
  double raw_perm = 0.0;
  rsc::alpha_from_moments(SpdMatrix(Matrix(perm * om * perm.transpose())), mp, 3,
                          &raw_perm);
  CHECK(raw_perm == doctest::Approx(raw_base).epsilon(1e-12));
}

TEST_CASE("select_alpha sizes the resample by the coupon rule") {
  DataSet g = gaussian_data(100, Matrix::Identity(5, 5), 215);
  auto sel = rsc::select_alpha(g, rsc::M2Source::scm_inverse, 25, 216);
  // ceil(0.975*100) = 98 distinct rows; the harmonic sum 368.74 rounds to 369.
  CHECK(sel.resample_size == 369);
  CHECK(sel.moments.resample_size == 369);
  CHECK(sel.alpha >= 0.0);
  CHECK(sel.alpha <= 1.0);
  CHECK(rsc::alpha_hat(g, rsc::M2Source::scm_inverse, 25, 216) ==
        doctest::Approx(sel.alpha));
}

TEST_CASE("select_alpha user source requires the oracle matrix") {
  DataSet g = gaussian_data(50, Matrix::Identity(3, 3), 217);
  CHECK_THROWS_AS(rsc::select_alpha(g, rsc::M2Source::user, 10, 218), rsc::Error);
  SpdMatrix omega = SpdMatrix::identity(3);
  auto sel = rsc::select_alpha(g, rsc::M2Source::user, 10, 218, &omega);
  CHECK(sel.alpha >= 0.0);
  CHECK(sel.alpha <= 1.0);
}

TEST_CASE("select_alpha is reproducible and seed-sensitive") {
  DataSet g = gaussian_data(60, Matrix::Identity(3, 3), 219);
  auto a = rsc::select_alpha(g, rsc::M2Source::scm_inverse, 30, 220);
  auto b = rsc::select_alpha(g, rsc::M2Source::scm_inverse, 30, 220);
  CHECK(a.alpha == b.alpha);
  CHECK(a.raw == b.raw);
  CHECK((a.moments.m1 - b.moments.m1).norm() == 0.0);

  auto c = rsc::select_alpha(g, rsc::M2Source::scm_inverse, 30, 221);
  CHECK(a.moments.m2 != c.moments.m2);
}

TEST_CASE("tme_inverse source runs end to end") {
  Matrix sigma(3, 3);
  sigma << 1.5, 0.2, 0, 0.2, 1.0, 0.1, 0, 0.1, 0.8;
  DataSet g = gaussian_data(80, sigma, 222);
  auto sel = rsc::select_alpha(g, rsc::M2Source::tme_inverse, 20, 223);
  CHECK(sel.alpha >= 0.0);
  CHECK(sel.alpha <= 1.0);
  CHECK(sel.moments.replicates == 20);
}
