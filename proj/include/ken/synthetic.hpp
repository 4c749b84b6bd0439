#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ken/embedding_set.hpp"
#include "ken/errors.hpp"

namespace ken {

// Deterministic generator: mt19937_64 drives everything, doubles come from
// the top 53 bits, normals from Box-Muller (pair cached), categorical draws
// from CDF inversion. No std::distribution objects, so identical seeds give
// identical streams on every platform for a given libm.
class Rng {
 public:
  static constexpr const char* kId = "mt19937_64/u53/box-muller/cdf";

  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // [0, 1)
  double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // cdf is a running sum of weights; returns the first bucket whose
  // cumulative mass exceeds the draw.
  std::size_t categorical(const std::vector<double>& cdf) {
    const double draw = uniform01() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), draw);
    return std::min(std::size_t(it - cdf.begin()), cdf.size() - 1);
  }

  // k distinct indices from [0, n), ascending (partial Fisher-Yates).
  std::vector<Eigen::Index> subsample(Eigen::Index n, Eigen::Index k) {
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pool[std::size_t(i)] = i;
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto j = i + Eigen::Index(uniform01() * double(n - i));
      std::swap(pool[std::size_t(i)], pool[std::size_t(std::min(j, n - 1))]);
    }
    pool.resize(std::size_t(k));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Isotropic Gaussian mixture: row i of `means` is the center of component i
// with weight weights[i] and per-coordinate standard deviation stds[i].
struct GmmSpec {
  Eigen::MatrixXd means;        // components x dim
  std::vector<double> weights;  // nonnegative, sums to 1
  std::vector<double> stds;
  Eigen::Index count = 0;
  std::uint64_t seed = 0;
  std::string label;
};

inline void validate(const GmmSpec& spec) {
  const auto k = std::size_t(spec.means.rows());
  if (k == 0 || spec.means.cols() == 0)
    throw invalid_input("gmm spec needs at least one component and dimension");
  if (spec.weights.size() != k || spec.stds.size() != k)
    throw invalid_input("gmm spec: weights/stds must match component count");
  double sum = 0.0;
  for (double w : spec.weights) {
    if (!(w >= 0) || !std::isfinite(w))
      throw invalid_input("gmm spec: weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw invalid_input("gmm spec: weights must sum to 1, got " +
                        std::to_string(sum));
  for (double s : spec.stds)
    if (!(s > 0) || !std::isfinite(s))
      throw invalid_input("gmm spec: stds must be positive");
  if (!spec.means.allFinite())
    throw invalid_input("gmm spec: means must be finite");
  if (spec.count < 1) throw invalid_input("gmm spec: count must be >= 1");
}

struct GmmSample {
  EmbeddingSet set;
  std::vector<int> labels;  // component index per row
};

inline GmmSample sample_gmm(const GmmSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  std::vector<double> cdf(spec.weights.size());
  std::partial_sum(spec.weights.begin(), spec.weights.end(), cdf.begin());

  const Eigen::Index dim = spec.means.cols();
  Eigen::MatrixXd vectors(spec.count, dim);
  std::vector<int> labels(static_cast<std::size_t>(spec.count));
  for (Eigen::Index i = 0; i < spec.count; ++i) {
    const auto comp = rng.categorical(cdf);
    labels[std::size_t(i)] = int(comp);
    const double std_dev = spec.stds[comp];
    for (Eigen::Index j = 0; j < dim; ++j)
      vectors(i, j) =
          spec.means(Eigen::Index(comp), j) + std_dev * rng.gaussian();
  }
  return {make_embedding_set(std::move(vectors), spec.label),
          std::move(labels)};
}

// ---------------------------------------------------------------------------
// Built-in 2-D benchmark scenarios. The reference distribution is four modes
// on the axis-aligned unit circle; novel modes sit on the diagonals. All
// components use std 0.05, for which sigma = 0.5 is a well-behaved kernel
// bandwidth.

// What a benchmark scenario predicts about its own evaluation, so checks
// downstream need no hard-coded table of targets.
struct ExpectedTrend {
  std::optional<double> ken_target;   // expected KEN, when the scenario pins one
  double ken_tolerance = 0.0;         // half-width around ken_target
  std::optional<int> dominant_modes;  // eigenvalues expected above threshold
  double dominant_threshold = 0.0;
  std::optional<double> rken_excess_min;  // lower bound on rken - ken
  std::string note;
};

struct ScenarioData {
  GmmSpec test_spec;
  GmmSpec ref_spec;
  EmbeddingSet test;
  EmbeddingSet ref;
  std::vector<int> test_labels;
  std::vector<int> ref_labels;
  ExpectedTrend expected;
};

namespace detail {

inline Eigen::MatrixXd axis_modes() {
  Eigen::MatrixXd m(4, 2);
  m << 0, 1, 1, 0, 0, -1, -1, 0;
  return m;
}

inline Eigen::MatrixXd diagonal_modes() {
  Eigen::MatrixXd m(4, 2);
  m << 0.7, 0.7, -0.7, -0.7, -0.7, 0.7, 0.7, -0.7;
  return m;
}

inline GmmSpec uniform_spec(Eigen::MatrixXd means, Eigen::Index count,
                            std::uint64_t seed, std::string label) {
  const auto k = std::size_t(means.rows());
  GmmSpec spec;
  spec.means = std::move(means);
  spec.weights.assign(k, 1.0 / double(k));
  spec.stds.assign(k, 0.05);
  spec.count = count;
  spec.seed = seed;
  spec.label = std::move(label);
  return spec;
}

inline Eigen::MatrixXd vstack(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace detail

// Columns of the six-scenario benchmark (test distribution vs the 4-mode
// axis reference, all weights per mode):
//   1: two novel diagonal modes, 1/2 each
//   2: four novel diagonal modes, 1/4 each
//   3: two shared axis modes + four novel, 1/6 each
//   4: two shared axis modes at 0.4 each + four novel at 0.05 each
//   5: same distribution as the reference (different seed)
//   6: as column 2, but the reference gains four far modes (1/8 each)
inline ScenarioData scenario_figure1(int column, Eigen::Index count,
                                     std::uint64_t seed) {
  if (column < 1 || column > 6)
    throw invalid_input("scenario column must be in 1..6");
  if (count < 1) throw invalid_input("scenario count must be >= 1");

  const Eigen::MatrixXd axis = detail::axis_modes();
  const Eigen::MatrixXd diag = detail::diagonal_modes();

  GmmSpec ref = detail::uniform_spec(axis, count, seed + 1, "ref");
  GmmSpec test;
  ExpectedTrend expected;
  switch (column) {
    case 1:
      test = detail::uniform_spec(diag.topRows(2), count, seed, "test");
      expected = {0.74, 0.15, 2, 0.05, std::nullopt, "two novel modes"};
      break;
    case 2:
      test = detail::uniform_spec(diag, count, seed, "test");
      expected = {1.40, 0.15, 4, 0.05, std::nullopt, "four novel modes"};
      break;
    case 3:
      test = detail::uniform_spec(detail::vstack(axis.topRows(2), diag),
                                  count, seed, "test");
      expected = {0.92, 0.15, 4, 0.05, std::nullopt,
                  "four novel plus two shared modes"};
      break;
    case 4:
      test = detail::uniform_spec(detail::vstack(axis.topRows(2), diag),
                                  count, seed, "test");
      test.weights = {0.4, 0.4, 0.05, 0.05, 0.05, 0.05};
      expected = {std::nullopt, 0.0, 6, 0.02, std::nullopt,
                  "shared modes upweighted, six detectable eigenvalues"};
      break;
    case 5:
      test = detail::uniform_spec(axis, count, seed, "test");
      expected = {0.0, 0.05, 0, 0.05, std::nullopt, "identical distributions"};
      break;
    case 6: {
      test = detail::uniform_spec(diag, count, seed, "test");
      Eigen::MatrixXd far(4, 2);
      far << 2, 2, -2, -2, -2, 2, 2, -2;
      ref = detail::uniform_spec(detail::vstack(axis, far), count, seed + 1,
                                 "ref");
      expected = {1.40, 0.15, 4, 0.05, 0.3,
                  "extra reference-only modes raise the swapped score"};
      break;
    }
  }

  ScenarioData data;
  data.test_spec = test;
  data.ref_spec = ref;
  data.expected = std::move(expected);
  GmmSample ts = sample_gmm(test);
  GmmSample rs = sample_gmm(ref);
  data.test = std::move(ts.set);
  data.test_labels = std::move(ts.labels);
  data.ref = std::move(rs.set);
  data.ref_labels = std::move(rs.labels);
  return data;
}

// Test distribution P_t = alpha * P_novel + (1 - alpha) * P_ref, drawn with
// a per-sample Bernoulli(alpha) source choice, against a reference drawn
// from ref_spec alone. `count` and `seed` override the per-spec fields: the
// reference uses seed + 1, the test side seed. Labels index ref components
// first, then novel components after them.
inline ScenarioData scenario_alpha_mixture(double alpha,
                                           const GmmSpec& ref_spec,
                                           const GmmSpec& novel_spec,
                                           Eigen::Index count,
                                           std::uint64_t seed) {
  if (!(alpha >= 0) || !(alpha <= 1))
    throw invalid_input("alpha must be in [0, 1]");
  if (count < 1) throw invalid_input("scenario count must be >= 1");
  validate(ref_spec);
  validate(novel_spec);
  if (ref_spec.means.cols() != novel_spec.means.cols())
    throw invalid_input("alpha mixture: specs must share dimension");

  const Eigen::Index dim = ref_spec.means.cols();
  const auto ref_k = std::size_t(ref_spec.means.rows());
  const auto novel_k = std::size_t(novel_spec.means.rows());

  ScenarioData data;
  data.ref_spec = ref_spec;
  data.ref_spec.count = count;
  data.ref_spec.seed = seed + 1;
  data.ref_spec.label = "ref";
  GmmSample rs = sample_gmm(data.ref_spec);
  data.ref = std::move(rs.set);
  data.ref_labels = std::move(rs.labels);

  // Bookkeeping spec for the report: the effective mixture, renormalized to
  // absorb rounding in the blended weights.
  data.test_spec.means = detail::vstack(ref_spec.means, novel_spec.means);
  data.test_spec.weights.resize(ref_k + novel_k);
  data.test_spec.stds.resize(ref_k + novel_k);
  double total = 0.0;
  for (std::size_t i = 0; i < ref_k; ++i) {
    data.test_spec.weights[i] = (1.0 - alpha) * ref_spec.weights[i];
    data.test_spec.stds[i] = ref_spec.stds[i];
    total += data.test_spec.weights[i];
  }
  for (std::size_t i = 0; i < novel_k; ++i) {
    data.test_spec.weights[ref_k + i] = alpha * novel_spec.weights[i];
    data.test_spec.stds[ref_k + i] = novel_spec.stds[i];
    total += data.test_spec.weights[ref_k + i];
  }
  for (double& w : data.test_spec.weights) w /= total;
  data.test_spec.count = count;
  data.test_spec.seed = seed;
  data.test_spec.label = "test";

  std::vector<double> ref_cdf(ref_k);
  std::partial_sum(ref_spec.weights.begin(), ref_spec.weights.end(),
                   ref_cdf.begin());
  std::vector<double> novel_cdf(novel_k);
  std::partial_sum(novel_spec.weights.begin(), novel_spec.weights.end(),
                   novel_cdf.begin());

  Rng rng(seed);
  Eigen::MatrixXd vectors(count, dim);
  std::vector<int> labels(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    const bool from_novel = rng.uniform01() < alpha;
    const GmmSpec& src = from_novel ? novel_spec : ref_spec;
    const auto comp = rng.categorical(from_novel ? novel_cdf : ref_cdf);
    labels[std::size_t(i)] = int(from_novel ? ref_k + comp : comp);
    const double std_dev = src.stds[comp];
    for (Eigen::Index j = 0; j < dim; ++j)
      vectors(i, j) =
          src.means(Eigen::Index(comp), j) + std_dev * rng.gaussian();
  }
  data.test = make_embedding_set(std::move(vectors), "test");
  data.test_labels = std::move(labels);

  data.expected.note = "novelty grows with the mixing fraction";
  if (alpha == 0.0) {
    data.expected.ken_target = 0.0;
    data.expected.ken_tolerance = 0.05;
  }
  return data;
}

// Built-in 2-D instance: 4-mode axis reference vs the first `novel_modes`
// diagonal modes, uniform weights on each side, std 0.05.
inline ScenarioData scenario_alpha_mixture(double alpha, int novel_modes,
                                           Eigen::Index count,
                                           std::uint64_t seed) {
  if (novel_modes < 1 || novel_modes > 4)
    throw invalid_input("novel_modes must be in 1..4");
  if (count < 1) throw invalid_input("scenario count must be >= 1");
  const GmmSpec ref =
      detail::uniform_spec(detail::axis_modes(), count, seed + 1, "ref");
  const GmmSpec novel = detail::uniform_spec(
      detail::diagonal_modes().topRows(novel_modes), count, seed, "novel");
  return scenario_alpha_mixture(alpha, ref, novel, count, seed);
}

}  // namespace ken
