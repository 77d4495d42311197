#include "linalg.hpp"

#include <cmath>

namespace rsc {

namespace detail {

Vector sym_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(errc::numeric, "eigenvalue iteration failed");
  return es.eigenvalues();
}

void normalize_eigvec_signs(Matrix& q) {
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double scale = q.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const double v = q(i, j);
      if (std::abs(v) > 1e-12 * scale) {
        if (v < 0.0) q.col(j) = -q.col(j);
        break;
      }
    }
  }
}

Matrix trace_normalize(const Matrix& a) {
  const double tr = a.trace();
  if (!(tr > 0.0)) fail(errc::domain, "trace_normalize: nonpositive trace");
  return (static_cast<double>(a.rows()) / tr) * a;
}

bool loewner_leq(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows()) fail(errc::invalid_argument, "loewner_leq: dimension mismatch");
  const Matrix d = b - a;
  return sym_eigenvalues(d)(0) >= -tol;
}

}  // namespace detail

SpdMatrix::SpdMatrix(Matrix a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    fail(errc::invalid_argument, "SpdMatrix: not square");
  if (!a.allFinite()) fail(errc::invalid_input, "SpdMatrix: non-finite entries");
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * std::max(1.0, std::abs(a(i, j))))
        fail(errc::invalid_input, "SpdMatrix: not symmetric");
  a_ = 0.5 * (a + a.transpose());
  const Vector ev = detail::sym_eigenvalues(a_);
  lmin_ = ev(0);
  lmax_ = ev(ev.size() - 1);
  // Tiny negative rounding is tolerated; anything beyond is indefinite input.
  if (lmin_ < -(pd_tolerance(std::max(lmax_, 0.0)) + 1e-14 * std::max(1.0, std::abs(lmax_))))
    fail(errc::invalid_input, "SpdMatrix: not positive semidefinite");
  strict_ = lmin_ > pd_tolerance(lmax_);
}

SpdMatrix SpdMatrix::identity(Eigen::Index p) { return SpdMatrix(Matrix::Identity(p, p)); }

EigenDecomposition sym_eigen(const SpdMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat());
  if (es.info() != Eigen::Success) fail(errc::numeric, "eigenvalue iteration failed");
  EigenDecomposition dec;
  dec.values = es.eigenvalues().reverse();
  dec.vectors = es.eigenvectors().rowwise().reverse();
  detail::normalize_eigvec_signs(dec.vectors);
  return dec;
}

Matrix matrix_log(const SpdMatrix& a) {
  const EigenDecomposition dec = sym_eigen(a);
  const double lmax = dec.values(0);
  if (dec.values(dec.values.size() - 1) <= pd_tolerance(lmax))
    fail(errc::singular, "matrix_log: matrix not strictly positive definite");
  const Vector logs = dec.values.array().log();
  return dec.vectors * logs.asDiagonal() * dec.vectors.transpose();
}

SpdMatrix spd_inverse(const SpdMatrix& a) {
  const EigenDecomposition dec = sym_eigen(a);
  const double lmax = dec.values(0);
  if (dec.values(dec.values.size() - 1) <= pd_tolerance(lmax))
    fail(errc::singular, "spd_inverse: matrix not strictly positive definite");
  const Vector inv = dec.values.cwiseInverse();
  Matrix r = dec.vectors * inv.asDiagonal() * dec.vectors.transpose();
  return SpdMatrix(0.5 * (r + r.transpose()));
}

SpdMatrix pseudo_inverse(const SpdMatrix& a, double rank_tolerance) {
  const EigenDecomposition dec = sym_eigen(a);
  const double lmax = dec.values(0);
  Vector inv = Vector::Zero(dec.values.size());
  for (Eigen::Index i = 0; i < dec.values.size(); ++i)
    if (dec.values(i) > rank_tolerance * lmax && dec.values(i) > 0.0)
      inv(i) = 1.0 / dec.values(i);
  Matrix r = dec.vectors * inv.asDiagonal() * dec.vectors.transpose();
  return SpdMatrix(0.5 * (r + r.transpose()));
}

Matrix gram_schmidt(const Matrix& vectors) {
  if (vectors.rows() != vectors.cols())
    fail(errc::invalid_argument, "gram_schmidt: expected p vectors in R^p");
  Matrix q = vectors;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    const double norm = q.col(j).norm();
    if (norm < 1e-12 * std::max(1.0, vectors.col(j).norm()))
      fail(errc::degenerate, "gram_schmidt: numerically dependent input");
    q.col(j) /= norm;
  }
  return q;
}

SpdMatrix trace_normalize(const SpdMatrix& a) {
  return SpdMatrix(detail::trace_normalize(a.mat()));
}

bool loewner_leq(const SpdMatrix& a, const SpdMatrix& b, double tol) {
  return detail::loewner_leq(a.mat(), b.mat(), tol);
}

}  // namespace rsc
