#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "linalg.hpp"
#include "rng.hpp"

using rsc::Matrix;
using rsc::SpdMatrix;
using rsc::Vector;

namespace {

Matrix random_symmetric(int p, std::uint64_t seed) {
  auto gen = rsc::substream(seed);
  std::normal_distribution<double> nd;
  Matrix a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = nd(gen);
  return Matrix(0.5 * (a + a.transpose()));
}

SpdMatrix random_spd(int p, std::uint64_t seed) {
  Matrix a = random_symmetric(p, seed);
  Matrix s = a * a.transpose() + Matrix::Identity(p, p);
  return SpdMatrix(Matrix(0.5 * (s + s.transpose())));
}

// Eigen-based matrix exponential; oracle for the log round-trip.
Matrix sym_exp(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  return es.eigenvectors() *
         es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

TEST_CASE("SpdMatrix construction validates") {
  Matrix ok = Matrix::Identity(3, 3);
  SpdMatrix a(ok);
  CHECK(a.dim() == 3);
  CHECK(a.strictly_pd());
  CHECK(a.lambda_max() == doctest::Approx(1.0));
  CHECK(a.lambda_min() == doctest::Approx(1.0));

  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  CHECK_THROWS_AS(SpdMatrix{asym}, rsc::Error);

  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(SpdMatrix{indef}, rsc::Error);

  Matrix psd(2, 2);
  psd << 1, 0, 0, 0;
  SpdMatrix b(psd);  // PSD accepted, strict flag off
  CHECK_FALSE(b.strictly_pd());
}

TEST_CASE("sym_eigen diagonal and identity cases") {
  Matrix d(2, 2);
  d << 3, 0, 0, 1;
  auto ed = rsc::sym_eigen(SpdMatrix(d));
  CHECK(ed.values(0) == doctest::Approx(3.0));
  CHECK(ed.values(1) == doctest::Approx(1.0));
  // Q = I up to sign; sign normalization makes it exactly I here.
  CHECK((ed.vectors - Matrix::Identity(2, 2)).norm() < 1e-12);

  auto ei = rsc::sym_eigen(SpdMatrix::identity(3));
  for (int i = 0; i < 3; ++i) CHECK(ei.values(i) == doctest::Approx(1.0));
}

TEST_CASE("sym_eigen reconstruction and orthonormality") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    SpdMatrix a = random_spd(5, seed);
    auto ed = rsc::sym_eigen(a);
    Matrix rec =
        ed.vectors * ed.values.asDiagonal() * ed.vectors.transpose();
    CHECK((rec - a.mat()).norm() <= 1e-10 * a.mat().norm());
    CHECK((ed.vectors.transpose() * ed.vectors - Matrix::Identity(5, 5))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    for (int i = 0; i + 1 < 5; ++i) CHECK(ed.values(i) >= ed.values(i + 1));
  }
}

TEST_CASE("matrix_log scalar cases") {
  CHECK(rsc::matrix_log(SpdMatrix::identity(4)).norm() == doctest::Approx(0.0));

  Matrix d(2, 2);
  d << std::exp(1.0), 0, 0, 1;
  Matrix lg = rsc::matrix_log(SpdMatrix(d));
  CHECK(lg(0, 0) == doctest::Approx(1.0));
  CHECK(lg(1, 1) == doctest::Approx(0.0));
  CHECK(std::abs(lg(0, 1)) < 1e-14);
}

TEST_CASE("matrix_log rejects singular input") {
  Matrix d(2, 2);
  d << 1, 0, 0, 0;
  CHECK_THROWS_AS(rsc::matrix_log(SpdMatrix(d)), rsc::Error);
}

TEST_CASE("exp(log(A)) round-trip") {
  for (std::uint64_t seed : {21u, 22u, 23u, 24u}) {
    SpdMatrix a = random_spd(4, seed);
    Matrix rec = sym_exp(rsc::matrix_log(a));
    CHECK((rec - a.mat()).norm() <= 1e-9 * a.mat().norm());
  }
}

TEST_CASE("spd_inverse diagonal and identity") {
  Matrix d(2, 2);
  d << 2, 0, 0, 4;
  SpdMatrix inv = rsc::spd_inverse(SpdMatrix(d));
  CHECK(inv.mat()(0, 0) == doctest::Approx(0.5));
  CHECK(inv.mat()(1, 1) == doctest::Approx(0.25));

  SpdMatrix ii = rsc::spd_inverse(SpdMatrix::identity(3));
  CHECK((ii.mat() - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("spd_inverse residual on random SPD") {
  for (std::uint64_t seed : {31u, 32u}) {
    SpdMatrix a = random_spd(6, seed);
    SpdMatrix inv = rsc::spd_inverse(a);
    CHECK((a.mat() * inv.mat() - Matrix::Identity(6, 6)).norm() < 1e-9);
  }
}

TEST_CASE("spd_inverse rejects singular input") {
  Matrix d(2, 2);
  d << 1, 0, 0, 0;
  CHECK_THROWS_AS(rsc::spd_inverse(SpdMatrix(d)), rsc::Error);
}

TEST_CASE("pseudo_inverse rank-deficient cases") {
  Matrix d(2, 2);
  d << 2, 0, 0, 0;
  SpdMatrix pinv = rsc::pseudo_inverse(SpdMatrix(d), 1e-10);
  CHECK(pinv.mat()(0, 0) == doctest::Approx(0.5));
  CHECK(pinv.mat()(1, 1) == doctest::Approx(0.0));

  SpdMatrix ii = rsc::pseudo_inverse(SpdMatrix::identity(3), 1e-10);
  CHECK((ii.mat() - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("pseudo_inverse Moore-Penrose identities on rank-2 PSD") {
  auto gen = rsc::substream(41);
  std::normal_distribution<double> nd;
  Matrix b(4, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) b(i, j) = nd(gen);
  Matrix a0 = b * b.transpose();
  SpdMatrix a(Matrix(0.5 * (a0 + a0.transpose())));
  Matrix ap = rsc::pseudo_inverse(a, 1e-10).mat();
  const Matrix& am = a.mat();
  CHECK((am * ap * am - am).norm() < 1e-9);
  CHECK((ap * am * ap - ap).norm() < 1e-9);
  CHECK(((am * ap) - (am * ap).transpose()).norm() < 1e-9);
  CHECK(((ap * am) - (ap * am).transpose()).norm() < 1e-9);
}

TEST_CASE("gram_schmidt elementary case") {
  Matrix v(2, 2);
  v.col(0) << 1, 0;
  v.col(1) << 1, 1;
  Matrix q = rsc::gram_schmidt(v);
  CHECK((q.col(0) - Vector::Unit(2, 0)).norm() < 1e-12);
  CHECK((q.col(1) - Vector::Unit(2, 1)).norm() < 1e-12);
}

TEST_CASE("gram_schmidt idempotence and orthonormality") {
  auto gen = rsc::substream(51);
  std::normal_distribution<double> nd;
  Matrix v(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) v(i, j) = nd(gen);
  Matrix q = rsc::gram_schmidt(v);
  CHECK((q.transpose() * q - Matrix::Identity(10, 10)).norm() < 1e-10);
  Matrix q2 = rsc::gram_schmidt(q);
  CHECK((q2 - q).norm() < 1e-12);
}

TEST_CASE("gram_schmidt rejects dependent input") {
  Matrix v(2, 2);
  v.col(0) << 1, 0;
  v.col(1) << 2, 0;
  CHECK_THROWS_AS(rsc::gram_schmidt(v), rsc::Error);
}

TEST_CASE("trace_normalize examples") {
  Matrix d(2, 2);
  d << 1, 0, 0, 3;
  SpdMatrix t = rsc::trace_normalize(SpdMatrix(d));
  CHECK(t.mat()(0, 0) == doctest::Approx(0.5));
  CHECK(t.mat()(1, 1) == doctest::Approx(1.5));
  CHECK(t.mat().trace() == doctest::Approx(2.0).epsilon(1e-12));

  // Fixed point: trace already p.
  SpdMatrix again = rsc::trace_normalize(t);
  CHECK((again.mat() - t.mat()).norm() < 1e-12);
}

TEST_CASE("trace_normalize scale invariance") {
  SpdMatrix a = random_spd(4, 61);
  Matrix base = rsc::trace_normalize(a).mat();
  for (double c : {0.1, 1.0, 1e6}) {
    SpdMatrix scaled(Matrix(c * a.mat()));
    CHECK((rsc::trace_normalize(scaled).mat() - base).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("loewner_leq basic cases") {
  SpdMatrix i2 = SpdMatrix::identity(2);
  SpdMatrix two(Matrix(2.0 * Matrix::Identity(2, 2)));
  CHECK(rsc::loewner_leq(i2, two, 0.0));
  CHECK_FALSE(rsc::loewner_leq(two, i2, 0.0));

  Matrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 3;
  b << 2, 0, 0, 2;
  // Difference has eigenvalues +1 and -1: incomparable.
  CHECK_FALSE(rsc::loewner_leq(SpdMatrix(a), SpdMatrix(b), 1e-12));
  CHECK_FALSE(rsc::loewner_leq(SpdMatrix(b), SpdMatrix(a), 1e-12));
}

TEST_CASE("loewner_leq dimension mismatch") {
  CHECK_THROWS_AS(
      rsc::loewner_leq(SpdMatrix::identity(2), SpdMatrix::identity(3), 0.0),
      rsc::Error);
}

TEST_CASE("loewner_leq is a partial order on commuting matrices") {
  // Simultaneously diagonal sample: the order reduces to entrywise
  // comparison of the diagonals, so reflexive/antisymmetric/transitive
  // must all hold exactly.
  auto gen = rsc::substream(71);
  std::uniform_real_distribution<double> ud(0.5, 3.0);
  std::vector<SpdMatrix> sample;
  for (int k = 0; k < 6; ++k) {
    Matrix d = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) d(i, i) = ud(gen);
    sample.emplace_back(d);
  }
  const double tol = 1e-12;
  for (const auto& a : sample) CHECK(rsc::loewner_leq(a, a, tol));
  for (const auto& a : sample)
    for (const auto& b : sample) {
      bool ab = rsc::loewner_leq(a, b, tol);
      bool ba = rsc::loewner_leq(b, a, tol);
      if (ab && ba) CHECK((a.mat() - b.mat()).norm() < 1e-9);
      for (const auto& c : sample) {
        if (ab && rsc::loewner_leq(b, c, tol))
          CHECK(rsc::loewner_leq(a, c, 1e-9));
      }
    }
}
