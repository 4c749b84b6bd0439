#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "ken/embedding_set.hpp"
#include "ken/errors.hpp"

namespace ken {

struct KernelConfig {
  double sigma = 1.0;
  double eta = 1.0;
};

inline void validate(const KernelConfig& config) {
  if (!(config.sigma > 0) || !std::isfinite(config.sigma))
    throw invalid_input("sigma must be positive and finite");
  if (!(config.eta >= 1) || !std::isfinite(config.eta))
    throw invalid_input("eta must be >= 1 and finite");
}

// Normalized Gaussian kernel k(x,y) = exp(-|x-y|^2 / (2 sigma^2)); k(x,x)=1.
inline double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y,
                              double sigma) {
  if (x.size() != y.size())
    throw invalid_input("gaussian_kernel: dimension mismatch (" +
                        std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
  if (!(sigma > 0) || !std::isfinite(sigma))
    throw invalid_input("sigma must be positive and finite");
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

// Scaled kernel blocks over a test set X (n rows) and reference set Y (m
// rows):
//   kxx = (1/n)      [k(x_i, x_j)]   n x n
//   kyy = (1/m)      [k(y_s, y_t)]   m x m
//   kxy = (1/sqrt(nm)) [k(x_i, y_s)] n x m
// kxx and kyy are exactly symmetric (each unordered pair computed once and
// mirrored) with diagonals written directly as 1/n and 1/m.
struct KernelBlocks {
  Eigen::MatrixXd kxx, kyy, kxy;

  Eigen::Index n() const { return kxx.rows(); }
  Eigen::Index m() const { return kyy.rows(); }
};

namespace detail {

// Squared distances via |x|^2 + |y|^2 - 2 x.y, clamped at zero. The Gram
// products go through BLAS; everything else is exact enough for exp().
inline Eigen::MatrixXd self_block(const Eigen::MatrixXd& x, double sigma) {
  const Eigen::Index n = x.rows();
  const double inv_n = 1.0 / double(n);
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd gram = x * x.transpose();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double d2 = std::max(sq[i] + sq[j] - 2.0 * gram(i, j), 0.0);
      const double v = std::exp(-d2 * inv_two_sigma2) * inv_n;
      k(i, j) = v;
      k(j, i) = v;
    }
    k(j, j) = inv_n;
  }
  return k;
}

inline Eigen::MatrixXd cross_block(const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& y, double sigma) {
  const Eigen::Index n = x.rows(), m = y.rows();
  const double scale = 1.0 / std::sqrt(double(n) * double(m));
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  const Eigen::VectorXd sqx = x.rowwise().squaredNorm();
  const Eigen::VectorXd sqy = y.rowwise().squaredNorm();
  Eigen::MatrixXd gram = x * y.transpose();
  Eigen::MatrixXd k(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d2 = std::max(sqx[i] + sqy[j] - 2.0 * gram(i, j), 0.0);
      k(i, j) = std::exp(-d2 * inv_two_sigma2) * scale;
    }
  return k;
}

}  // namespace detail

inline KernelBlocks build_blocks(const EmbeddingSet& test,
                                 const EmbeddingSet& ref,
                                 const KernelConfig& config) {
  validate(test);
  validate(ref);
  validate(config);
  if (test.dim() != ref.dim())
    throw invalid_input("embedding dimension mismatch: test " +
                        std::to_string(test.dim()) + ", ref " +
                        std::to_string(ref.dim()));
  KernelBlocks blocks;
  blocks.kxx = detail::self_block(test.vectors, config.sigma);
  blocks.kyy = detail::self_block(ref.vectors, config.sigma);
  blocks.kxy = detail::cross_block(test.vectors, ref.vectors, config.sigma);
  return blocks;
}

// R-KEN runs on the role-swapped blocks; the cross block just transposes.
inline KernelBlocks swap_roles(const KernelBlocks& blocks) {
  return KernelBlocks{blocks.kyy, blocks.kxx, blocks.kxy.transpose()};
}

}  // namespace ken
