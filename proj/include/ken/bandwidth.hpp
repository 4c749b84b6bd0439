#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ken/embedding_set.hpp"
#include "ken/errors.hpp"
#include "ken/kernel.hpp"
#include "ken/novelty.hpp"
#include "ken/spectral.hpp"
#include "ken/synthetic.hpp"

namespace ken {

struct BandwidthResult {
  double sigma = 0.0;             // chosen candidate
  bool satisfied = false;         // variance threshold met
  std::vector<double> candidates; // the grid as given
  std::vector<double> variances;  // KEN variance per candidate evaluated
};

// Walk an ascending bandwidth grid and pick the smallest sigma whose KEN is
// stable across `trials` subsampled evaluations (sample variance below
// `variance_threshold`). Falls back to the largest candidate, flagged, when
// none qualifies. One seeded stream drives every subsample draw.
inline BandwidthResult select_bandwidth(const EmbeddingSet& test,
                                        const EmbeddingSet& ref,
                                        const std::vector<double>& candidates,
                                        double variance_threshold = 0.01,
                                        int trials = 10,
                                        double subsample_fraction = 0.5,
                                        std::uint64_t seed = 0,
                                        double eta = 1.0) {
  validate(test);
  validate(ref);
  if (candidates.empty())
    throw invalid_input("bandwidth grid must not be empty");
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!(candidates[i] > 0) || !std::isfinite(candidates[i]))
      throw invalid_input("bandwidth candidates must be positive");
    if (i > 0 && candidates[i] <= candidates[i - 1])
      throw invalid_input("bandwidth grid must be strictly ascending");
  }
  if (trials < 2) throw invalid_input("bandwidth selection needs >= 2 trials");
  if (!(subsample_fraction > 0) || !(subsample_fraction <= 1))
    throw invalid_input("subsample fraction must be in (0, 1]");
  const auto sub_n = Eigen::Index(double(test.count()) * subsample_fraction);
  const auto sub_m = Eigen::Index(double(ref.count()) * subsample_fraction);
  if (sub_n < 2 || sub_m < 2)
    throw invalid_input("subsample smaller than 2 points");

  Rng rng(seed);
  auto take = [](const EmbeddingSet& set,
                 const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd picked(static_cast<Eigen::Index>(rows.size()), set.dim());
    for (std::size_t i = 0; i < rows.size(); ++i)
      picked.row(Eigen::Index(i)) = set.vectors.row(rows[i]);
    return EmbeddingSet{std::move(picked), set.label};
  };

  BandwidthResult result;
  result.candidates = candidates;
  for (double sigma : candidates) {
    const KernelConfig config{sigma, eta};
    std::vector<double> scores;
    scores.reserve(std::size_t(trials));
    for (int t = 0; t < trials; ++t) {
      const EmbeddingSet sub_test = take(test, rng.subsample(test.count(), sub_n));
      const EmbeddingSet sub_ref = take(ref, rng.subsample(ref.count(), sub_m));
      const KernelBlocks blocks = build_blocks(sub_test, sub_ref, config);
      const SpectralResult spectrum = differential_spectrum(
          blocks, eta, 1e-10, 1e-8, /*want_vectors=*/false);
      scores.push_back(ken_score(spectrum.eigenvalues_positive));
    }
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= double(trials);
    double variance = 0.0;
    for (double s : scores) variance += (s - mean) * (s - mean);
    variance /= double(trials - 1);
    result.variances.push_back(variance);
    if (variance < variance_threshold) {
      result.sigma = sigma;
      result.satisfied = true;
      return result;
    }
  }
  result.sigma = candidates.back();
  result.satisfied = false;
  return result;
}

}  // namespace ken
