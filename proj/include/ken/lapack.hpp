#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include <cblas.h>
#include <lapacke.h>

#include "ken/errors.hpp"

// Thin shims over LAPACKE/CBLAS. Eigen's default column-major storage is
// exactly LAPACK layout, so matrices pass through without copies.

namespace ken::detail {

// In-place upper Cholesky (a = U^T U on exit, upper triangle holds U).
// Returns the LAPACK info code: 0 on success, k > 0 when the order-k leading
// minor is not positive definite. The strictly lower triangle is untouched.
inline int cholesky_upper(Eigen::MatrixXd& a) {
  const auto n = lapack_int(a.rows());
  const int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'U', n, a.data(), n);
  if (info < 0)
    throw numerical_error("dpotrf: illegal argument " + std::to_string(-info));
  return info;
}

// In-place pivoted upper Cholesky: P^T a P = U^T U with the factor in the
// first `rank` rows of the upper triangle. piv is 1-based, P(piv[k], k) = 1.
// Returns 0 for full rank, > 0 when `a` is rank deficient or indefinite.
inline int cholesky_pivoted_upper(Eigen::MatrixXd& a,
                                  std::vector<lapack_int>& piv,
                                  lapack_int& rank) {
  const auto n = lapack_int(a.rows());
  piv.assign(std::size_t(n), 0);
  const int info = LAPACKE_dpstrf(LAPACK_COL_MAJOR, 'U', n, a.data(), n,
                                  piv.data(), &rank, -1.0);
  if (info < 0)
    throw numerical_error("dpstrf: illegal argument " + std::to_string(-info));
  return info;
}

// Overwrites the upper triangle of the leading n x n block of `a` (an upper
// triangular factor) with that of u * u^T.
inline void triangular_self_product_upper(Eigen::MatrixXd& a,
                                          Eigen::Index n) {
  const int info = LAPACKE_dlauum(LAPACK_COL_MAJOR, 'U', lapack_int(n),
                                  a.data(), lapack_int(a.rows()));
  if (info != 0)
    throw numerical_error("dlauum failed with info " + std::to_string(info));
}

// c := alpha * b * b^T + beta * c on the upper triangle, where b is the
// `cols`-column block of `v` starting at `first_col`.
inline void syrk_upper(const Eigen::MatrixXd& v, Eigen::Index first_col,
                       Eigen::Index cols, double alpha, double beta,
                       Eigen::MatrixXd& c) {
  cblas_dsyrk(CblasColMajor, CblasUpper, CblasNoTrans, blasint(v.rows()),
              blasint(cols), alpha, v.data() + first_col * v.rows(),
              blasint(v.rows()), beta, c.data(), blasint(c.rows()));
}

// c := b^T b on the upper triangle, where b is the leading `rows` rows of v.
inline void gram_upper(const Eigen::MatrixXd& v, Eigen::Index rows,
                       Eigen::MatrixXd& c) {
  cblas_dsyrk(CblasColMajor, CblasUpper, CblasTrans, blasint(v.cols()),
              blasint(rows), 1.0, v.data(), blasint(v.rows()), 0.0, c.data(),
              blasint(c.rows()));
}

// Symmetric eigenvalues of the upper triangle of `a`, ascending. Destroys
// `a`. With `want_vectors`, `a` holds orthonormal eigenvectors on exit
// (column i pairs with w[i]).
inline Eigen::VectorXd symmetric_eigen(Eigen::MatrixXd& a, bool want_vectors) {
  const auto n = lapack_int(a.rows());
  Eigen::VectorXd w(n);
  int info;
  if (want_vectors) {
    info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n,
                          w.data());
  } else {
#if defined(KEN_HAVE_SYEV_2STAGE)
    info = LAPACKE_dsyev_2stage(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n,
                                w.data());
#else
    info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n,
                          w.data());
#endif
  }
  if (info != 0)
    throw numerical_error("symmetric eigensolver failed with info " +
                          std::to_string(info));
  return w;
}

}  // namespace ken::detail
