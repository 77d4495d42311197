#pragma once

#include <Eigen/Dense>

#include "errors.hpp"

namespace rsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative singularity threshold: scale-free across the trace-normalized
// regime Tr = p.
inline double pd_tolerance(double lambda_max) { return 1e-10 * lambda_max; }

// Symmetric positive-(semi)definite matrix. Construction validates symmetry
// entrywise, rejects indefinite input, and records the eigenvalue extremes so
// the strict-PD flag is available without recomputation.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix a);
  static SpdMatrix identity(Eigen::Index p);

  Eigen::Index dim() const { return a_.rows(); }
  const Matrix& mat() const { return a_; }
  double lambda_max() const { return lmax_; }
  double lambda_min() const { return lmin_; }
  // lambda_min > pd_tolerance(lambda_max)
  bool strictly_pd() const { return strict_; }

 private:
  Matrix a_;
  double lmax_ = 0.0;
  double lmin_ = 0.0;
  bool strict_ = false;
};

struct EigenDecomposition {
  Vector values;   // sorted descending
  Matrix vectors;  // orthonormal columns, sign-normalized
};

EigenDecomposition sym_eigen(const SpdMatrix& a);

Matrix matrix_log(const SpdMatrix& a);
SpdMatrix spd_inverse(const SpdMatrix& a);
SpdMatrix pseudo_inverse(const SpdMatrix& a, double rank_tolerance);

// Columns of `vectors` are orthonormalized in order; the first column's
// direction is preserved.
Matrix gram_schmidt(const Matrix& vectors);

SpdMatrix trace_normalize(const SpdMatrix& a);
bool loewner_leq(const SpdMatrix& a, const SpdMatrix& b, double tol);

namespace detail {
// Internal counterparts working on plain matrices; used inside solver loops
// where per-step SpdMatrix validation would be wasted work. The inputs are
// symmetric by construction there.
Matrix trace_normalize(const Matrix& a);
bool loewner_leq(const Matrix& a, const Matrix& b, double tol);
// Eigenvalues of a symmetric matrix, ascending (Eigen's native order).
Vector sym_eigenvalues(const Matrix& a);
// Deterministic eigenvector sign: first nonzero component positive.
void normalize_eigvec_signs(Matrix& q);
}  // namespace detail

}  // namespace rsc
