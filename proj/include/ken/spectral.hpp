#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "ken/errors.hpp"
#include "ken/kernel.hpp"
#include "ken/lapack.hpp"

namespace ken {

// Joint kernel matrix
//   [ kxx            sqrt(eta) kxy ]
//   [ sqrt(eta) kxy^T   eta kyy    ]
// Symmetric PSD up to round-off; trace = 1 + eta exactly by construction.
inline Eigen::MatrixXd joint_kernel(const KernelBlocks& blocks, double eta) {
  if (!(eta >= 1) || !std::isfinite(eta))
    throw invalid_input("eta must be >= 1 and finite");
  const Eigen::Index n = blocks.n(), m = blocks.m();
  const double root_eta = std::sqrt(eta);
  Eigen::MatrixXd k(n + m, n + m);
  k.topLeftCorner(n, n) = blocks.kxx;
  k.topRightCorner(n, m) = root_eta * blocks.kxy;
  k.bottomLeftCorner(m, n) = k.topRightCorner(n, m).transpose();
  k.bottomRightCorner(m, m) = eta * blocks.kyy;
  return k;
}

enum class FactorizationPath {
  cholesky,
  cholesky_pivoted,
  cholesky_jitter,
  eigen_fallback
};

inline const char* to_string(FactorizationPath path) {
  switch (path) {
    case FactorizationPath::cholesky: return "cholesky";
    case FactorizationPath::cholesky_pivoted: return "cholesky_pivoted";
    case FactorizationPath::cholesky_jitter: return "cholesky_jitter";
    case FactorizationPath::eigen_fallback: return "eigen_fallback";
  }
  return "unknown";
}

struct FactorizationInfo {
  FactorizationPath path = FactorizationPath::cholesky;
  double jitter = 0.0;  // diagonal shift actually factored in
};

struct PsdFactor {
  Eigen::MatrixXd v;  // v^T v reconstructs the input (plus recorded jitter)
  bool upper_triangular = true;
  FactorizationInfo info;
};

// Factor a symmetric PSD matrix as V^T V. Plain Cholesky first; then pivoted
// Cholesky, which handles a rank-deficient PSD matrix without perturbing it
// by stopping at the numerical rank (kept only when the clipped factor
// reconstructs the input to 1e-7*max|k|); then a diagonal jitter ladder from
// 1e-10*trace/N doubling up to 1e-6*trace/N; as a last resort a symmetric
// eigendecomposition with negative eigenvalues clipped (V = sqrt(s) U^T).
// Eigenvalues below -1e-8*N are a hard error. Only the upper triangle of
// k_joint is read.
inline PsdFactor psd_factor(const Eigen::MatrixXd& k_joint) {
  if (k_joint.rows() != k_joint.cols())
    throw invalid_input("psd_factor: matrix must be square");
  const Eigen::Index size = k_joint.rows();
  const double trace = k_joint.trace();

  PsdFactor out;
  out.v = k_joint;
  if (detail::cholesky_upper(out.v) == 0) {
    out.v.triangularView<Eigen::StrictlyLower>().setZero();
    out.info = {FactorizationPath::cholesky, 0.0};
    return out;
  }
  out.v.resize(0, 0);

  {
    // A jittered factor would shift small genuine eigenvalues through their
    // repulsion against the lifted null space, so resolve exact rank
    // deficiency first: the pivoted factor drops only round-off mass.
    Eigen::MatrixXd u = k_joint;
    std::vector<lapack_int> piv;
    lapack_int rank = 0;
    detail::cholesky_pivoted_upper(u, piv, rank);
    u.triangularView<Eigen::StrictlyLower>().setZero();
    if (rank < size) u.bottomRows(size - rank).setZero();
    Eigen::MatrixXd v(size, size);
    for (Eigen::Index k = 0; k < size; ++k)
      v.col(Eigen::Index(piv[std::size_t(k)]) - 1) = u.col(k);
    u.resize(0, 0);
    bool accept = rank == size;
    if (!accept) {
      // keep the clipped factor only when it still reconstructs the input;
      // a matrix indefinite beyond round-off fails and falls through
      Eigen::MatrixXd recon(size, size);
      detail::gram_upper(v, rank, recon);
      double err = 0.0, scale = 0.0;
      for (Eigen::Index c = 0; c < size; ++c)
        for (Eigen::Index r = 0; r <= c; ++r) {
          err = std::max(err, std::abs(recon(r, c) - k_joint(r, c)));
          scale = std::max(scale, std::abs(k_joint(r, c)));
        }
      accept = err <= 1e-7 * scale;
    }
    if (accept) {
      out.v = std::move(v);
      out.upper_triangular = false;
      out.info = {FactorizationPath::cholesky_pivoted, 0.0};
      return out;
    }
  }

  const double delta0 = 1e-10 * trace / double(size);
  const double delta_max = 1e-6 * trace / double(size);
  if (delta0 > 0) {
    for (double delta = delta0; delta <= delta_max * (1 + 1e-12);
         delta *= 2) {
      out.v = k_joint;
      out.v.diagonal().array() += delta;
      if (detail::cholesky_upper(out.v) == 0) {
        out.v.triangularView<Eigen::StrictlyLower>().setZero();
        out.info = {FactorizationPath::cholesky_jitter, delta};
        return out;
      }
    }
  }

  Eigen::MatrixXd basis = k_joint;  // dsyevd reads the upper triangle only
  Eigen::VectorXd s = detail::symmetric_eigen(basis, true);
  const double eps_psd = 1e-8 * double(size);
  if (s[0] < -eps_psd) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "matrix is not PSD: min eigenvalue %.6g < %.6g", s[0],
                  -eps_psd);
    throw numerical_error(msg);
  }
  s = s.cwiseMax(0.0).cwiseSqrt();
  out.v = s.asDiagonal() * basis.transpose();
  out.upper_triangular = false;
  out.info = {FactorizationPath::eigen_fallback, 0.0};
  return out;
}

// Spectrum of the differential kernel matrix for one (test, ref, eta)
// triple, computed through the symmetric proxy Gamma = V D V^T with
// D = diag(+1 x n, -1 x m). Gamma shares the nonzero spectrum of the
// differential matrix; u = D V^T w maps its eigenvectors back exactly.
struct SpectralResult {
  Eigen::VectorXd eigenvalues_all;           // descending, size n+m
  std::vector<double> eigenvalues_positive;  // the entries above cutoff
  // Columns pair with eigenvalues_positive. `eigenvectors` are the recovered
  // differential-matrix eigenvectors (unit norm); `gamma_eigenvectors` the
  // symmetric-proxy ones. Both follow the sign rule: flip so the sum over
  // the first n entries is nonnegative.
  Eigen::MatrixXd eigenvectors;
  Eigen::MatrixXd gamma_eigenvectors;
  double cutoff_used = 0.0;
  Eigen::Index n = 0, m = 0;
  FactorizationInfo factorization;
};

inline SpectralResult differential_spectrum(const KernelBlocks& blocks,
                                            double eta,
                                            double cutoff_abs = 1e-10,
                                            double cutoff_rel = 1e-8,
                                            bool want_vectors = true) {
  if (!(cutoff_abs > 0) || !(cutoff_rel > 0))
    throw invalid_input("cutoffs must be positive");
  const Eigen::Index n = blocks.n(), m = blocks.m();
  const Eigen::Index size = n + m;

  PsdFactor factor;
  {
    Eigen::MatrixXd k = joint_kernel(blocks, eta);
    factor = psd_factor(k);
  }

  Eigen::MatrixXd gamma(size, size);
  if (factor.upper_triangular) {
    // V's first n columns live in the leading n x n triangle, so the +1
    // part of V D V^T only touches the top-left block.
    gamma.setZero();
    gamma.topLeftCorner(n, n) = factor.v.topLeftCorner(n, n);
    detail::triangular_self_product_upper(gamma, n);
    detail::syrk_upper(factor.v, n, m, -1.0, 1.0, gamma);
  } else {
    detail::syrk_upper(factor.v, 0, n, 1.0, 0.0, gamma);
    detail::syrk_upper(factor.v, n, m, -1.0, 1.0, gamma);
  }
  if (!want_vectors) factor.v.resize(0, 0);

  const Eigen::VectorXd ascending =
      detail::symmetric_eigen(gamma, want_vectors);

  SpectralResult result;
  result.n = n;
  result.m = m;
  result.factorization = factor.info;
  result.eigenvalues_all = ascending.reverse();
  result.cutoff_used =
      std::max(cutoff_abs, cutoff_rel * result.eigenvalues_all[0]);

  Eigen::Index retained = 0;
  while (retained < size && result.eigenvalues_all[retained] > result.cutoff_used)
    ++retained;
  result.eigenvalues_positive.assign(
      result.eigenvalues_all.data(),
      result.eigenvalues_all.data() + retained);

  if (want_vectors) {
    result.eigenvectors.resize(size, retained);
    result.gamma_eigenvectors.resize(size, retained);
    for (Eigen::Index i = 0; i < retained; ++i) {
      // dsyevd returned ascending order; column size-1-i pairs with the
      // i-th largest eigenvalue.
      Eigen::VectorXd w = gamma.col(size - 1 - i);
      if (w.head(n).sum() < 0) w = -w;
      result.gamma_eigenvectors.col(i) = w;

      Eigen::VectorXd u =
          factor.upper_triangular
              ? Eigen::VectorXd(
                    factor.v.triangularView<Eigen::Upper>().transpose() * w)
              : Eigen::VectorXd(factor.v.transpose() * w);
      u.tail(m) = -u.tail(m);
      const double norm = u.norm();
      if (norm > 0) u /= norm;
      if (u.head(n).sum() < 0) u = -u;
      result.eigenvectors.col(i) = u;
    }
  } else {
    result.eigenvectors.resize(size, 0);
    result.gamma_eigenvectors.resize(size, 0);
  }
  return result;
}

}  // namespace ken
