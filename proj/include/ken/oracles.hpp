#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "ken/embedding_set.hpp"
#include "ken/errors.hpp"
#include "ken/kernel.hpp"
#include "ken/lapack.hpp"

// Independent cross-checks for the Cholesky-based spectrum. Both oracles are
// dense and meant for modest sizes; the production path never calls them.

namespace ken {

// The differential kernel matrix itself:
//   [  kxx             sqrt(eta) kxy ]
//   [ -sqrt(eta) kxy^T   -eta kyy    ]
// Not symmetric, but its spectrum is real.
inline Eigen::MatrixXd differential_matrix(const KernelBlocks& blocks,
                                           double eta) {
  if (!(eta >= 1) || !std::isfinite(eta))
    throw invalid_input("eta must be >= 1 and finite");
  const Eigen::Index n = blocks.n(), m = blocks.m();
  const double root_eta = std::sqrt(eta);
  Eigen::MatrixXd k(n + m, n + m);
  k.topLeftCorner(n, n) = blocks.kxx;
  k.topRightCorner(n, m) = root_eta * blocks.kxy;
  k.bottomLeftCorner(m, n) = -root_eta * blocks.kxy.transpose();
  k.bottomRightCorner(m, m) = -eta * blocks.kyy;
  return k;
}

struct NonsymmetricSpectrum {
  Eigen::VectorXd real;  // sorted descending by real part
  Eigen::VectorXd imag;  // paired with `real`
};

// Straight dense eigensolve of the differential matrix.
inline NonsymmetricSpectrum oracle_nonsymmetric(const KernelBlocks& blocks,
                                                double eta) {
  const Eigen::MatrixXd k = differential_matrix(blocks, eta);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(k, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw numerical_error("nonsymmetric eigensolver did not converge");
  const auto values = solver.eigenvalues();
  std::vector<std::pair<double, double>> pairs(
      static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i)
    pairs[std::size_t(i)] = {values[i].real(), values[i].imag()};
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  NonsymmetricSpectrum out;
  out.real.resize(values.size());
  out.imag.resize(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out.real[i] = pairs[std::size_t(i)].first;
    out.imag[i] = pairs[std::size_t(i)].second;
  }
  return out;
}

// Kernel blocks for the plain inner-product kernel k(x,y) = x.y, with the
// same 1/n, 1/m, 1/sqrt(nm) scaling as the Gaussian blocks. Oracle-only:
// the production pipeline is Gaussian.
inline KernelBlocks linear_blocks(const EmbeddingSet& test,
                                  const EmbeddingSet& ref) {
  validate(test);
  validate(ref);
  if (test.dim() != ref.dim())
    throw invalid_input("embedding dimension mismatch");
  const Eigen::Index n = test.count(), m = ref.count();
  KernelBlocks blocks;
  blocks.kxx = (test.vectors * test.vectors.transpose()) / double(n);
  blocks.kyy = (ref.vectors * ref.vectors.transpose()) / double(m);
  blocks.kxy = (test.vectors * ref.vectors.transpose()) /
               std::sqrt(double(n) * double(m));
  // exact symmetry, same convention as the Gaussian blocks
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) blocks.kxx(j, i) = blocks.kxx(i, j);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < j; ++i) blocks.kyy(j, i) = blocks.kyy(i, j);
  return blocks;
}

// For the linear kernel the differential operator lives in embedding space:
//   C_X - eta C_Y, with C_X = (1/n) sum x_i x_i^T.
// Returns its full d-dimensional spectrum, descending. The nonzero part
// must match the differential matrix spectrum of linear_blocks exactly.
inline Eigen::VectorXd oracle_linear_feature(const EmbeddingSet& test,
                                             const EmbeddingSet& ref,
                                             double eta) {
  validate(test);
  validate(ref);
  if (test.dim() != ref.dim())
    throw invalid_input("embedding dimension mismatch");
  if (test.dim() > 64)
    throw invalid_input("feature-space oracle is limited to dim <= 64");
  if (!(eta >= 1) || !std::isfinite(eta))
    throw invalid_input("eta must be >= 1 and finite");
  Eigen::MatrixXd lambda =
      (test.vectors.transpose() * test.vectors) / double(test.count()) -
      eta * (ref.vectors.transpose() * ref.vectors) / double(ref.count());
  const Eigen::VectorXd ascending = detail::symmetric_eigen(lambda, false);
  return ascending.reverse();
}

// Max elementwise gap between two spectra after padding the shorter one
// with zeros; both sorted descending first. Spectra that agree up to zero
// padding come back ~0.
inline double spectrum_deviation(Eigen::VectorXd a, Eigen::VectorXd b) {
  const Eigen::Index size = std::max(a.size(), b.size());
  auto padded = [size](Eigen::VectorXd& v) {
    const Eigen::Index old = v.size();
    v.conservativeResize(size);
    v.tail(size - old).setZero();
    std::sort(v.data(), v.data() + size, std::greater<double>());
  };
  padded(a);
  padded(b);
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace ken
