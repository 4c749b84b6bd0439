#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ken/embedding_set.hpp"
#include "ken/errors.hpp"
#include "ken/kernel.hpp"
#include "ken/spectral.hpp"

namespace ken {

// KEN = sum_i lambda_i * ln(S / lambda_i) with S = sum_i lambda_i, over
// strictly positive eigenvalues. Empty input scores 0; a single eigenvalue
// scores 0 exactly (ln 1).
inline double ken_score(const std::vector<double>& lambdas) {
  if (lambdas.empty()) return 0.0;
  double sum = 0.0;
  for (double v : lambdas) {
    if (!(v > 0) || !std::isfinite(v))
      throw invalid_input("ken_score: eigenvalues must be positive, got " +
                          std::to_string(v));
    sum += v;
  }
  double score = 0.0;
  for (double v : lambdas) score += v * std::log(sum / v);
  return score;
}

// At eta = 1 with mode frequency vectors omega (test) and gamma (ref), the
// idealized spectrum is lambda_i = max(omega_i - gamma_i, 0) and KEN equals
// S * H(lambda / S), H the Shannon entropy in nats. Returns both sides.
struct EntropyIdentity {
  double direct = 0.0;
  double via_entropy = 0.0;
};

inline EntropyIdentity conditional_entropy_identity_check(
    const std::vector<double>& omega, const std::vector<double>& gamma) {
  if (omega.size() != gamma.size())
    throw invalid_input("frequency vectors must have equal length");
  auto check_prob = [](const std::vector<double>& p, const char* name) {
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0) || !std::isfinite(v))
        throw invalid_input(std::string(name) +
                            " must be a probability vector");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw invalid_input(std::string(name) + " must sum to 1, got " +
                          std::to_string(sum));
  };
  check_prob(omega, "omega");
  check_prob(gamma, "gamma");

  std::vector<double> lambdas;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const double diff = omega[i] - gamma[i];
    if (diff > 0) lambdas.push_back(diff);
  }
  EntropyIdentity out;
  out.direct = ken_score(lambdas);
  const double sum = std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
  if (sum > 0) {
    double entropy = 0.0;
    for (double v : lambdas) {
      const double p = v / sum;
      entropy -= p * std::log(p);
    }
    out.via_entropy = sum * entropy;
  }
  return out;
}

// One retained eigenvector summarized as its top-scoring members. Reference
// entries keep their joint-matrix indices (test rows 0..n-1, reference rows
// n..n+m-1); scores are the eigenvector entries themselves.
struct ModeEntry {
  Eigen::Index index = 0;
  double score = 0.0;
};

struct ModeSummary {
  int rank = 0;  // 1-based, rank 1 pairs with the largest eigenvalue
  double eigenvalue = 0.0;
  std::vector<ModeEntry> top_test;
  std::vector<ModeEntry> top_ref;
};

inline std::vector<ModeSummary> extract_modes(const SpectralResult& spectrum,
                                              int top_k, int top_r) {
  if (top_k < 0 || top_r < 0)
    throw invalid_input("top_k and top_r must be nonnegative");
  const Eigen::Index n = spectrum.n, m = spectrum.m;
  const int available = int(spectrum.eigenvectors.cols());
  const int modes = std::min(top_k, available);

  auto top_entries = [top_r](const auto& segment, Eigen::Index offset) {
    std::vector<ModeEntry> entries(static_cast<std::size_t>(segment.size()));
    for (Eigen::Index i = 0; i < segment.size(); ++i)
      entries[std::size_t(i)] = {offset + i, segment[i]};
    std::sort(entries.begin(), entries.end(),
              [](const ModeEntry& a, const ModeEntry& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.index < b.index;
              });
    if (Eigen::Index(entries.size()) > top_r)
      entries.resize(std::size_t(top_r));
    return entries;
  };

  std::vector<ModeSummary> out;
  out.reserve(std::size_t(modes));
  for (int k = 0; k < modes; ++k) {
    const Eigen::VectorXd& u = spectrum.eigenvectors.col(k);
    ModeSummary summary;
    summary.rank = k + 1;
    summary.eigenvalue = spectrum.eigenvalues_positive[std::size_t(k)];
    summary.top_test = top_entries(u.head(n), 0);
    summary.top_ref = top_entries(u.tail(m), n);
    out.push_back(std::move(summary));
  }
  return out;
}

// Metadata echoed into the report when the bandwidth was auto-selected.
struct SigmaSelection {
  bool satisfied = true;
  std::vector<double> candidates;  // the grid, ascending
  std::vector<double> variances;   // KEN variance per candidate evaluated
};

struct ReportConfig {
  double cutoff_abs = 1e-10;
  double cutoff_rel = 1e-8;
  double jitter = 0.0;
  std::optional<std::int64_t> seed;
  std::string factorization;
  std::string rng;  // RNG algorithm id when randomness was involved
  std::optional<SigmaSelection> sigma_selection;
  std::vector<std::string> warnings;
};

struct NoveltyReport {
  double eta = 1.0;
  double sigma = 1.0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::vector<double> eigenvalues_positive;
  double sum_positive = 0.0;
  double ken = 0.0;
  std::optional<double> rken;
  std::vector<ModeSummary> modes;
  ReportConfig config;
};

struct EvaluateOptions {
  double cutoff_abs = 1e-10;
  double cutoff_rel = 1e-8;
  int top_k = 3;
  int top_r = 10;
  bool rken = false;
  std::optional<std::int64_t> seed;
  std::string rng;
  std::optional<SigmaSelection> sigma_selection;
};

// Full pipeline: blocks -> spectrum -> score -> modes (-> swapped-role score
// when requested). Eigenvectors are only computed when top_k > 0.
inline NoveltyReport evaluate(const EmbeddingSet& test,
                              const EmbeddingSet& ref,
                              const KernelConfig& config,
                              const EvaluateOptions& options = {}) {
  const KernelBlocks blocks = build_blocks(test, ref, config);

  NoveltyReport report;
  report.eta = config.eta;
  report.sigma = config.sigma;
  report.n = blocks.n();
  report.m = blocks.m();
  report.config.cutoff_abs = options.cutoff_abs;
  report.config.cutoff_rel = options.cutoff_rel;
  report.config.seed = options.seed;
  report.config.rng = options.rng;
  report.config.sigma_selection = options.sigma_selection;

  const bool want_vectors = options.top_k > 0;
  const SpectralResult spectrum =
      differential_spectrum(blocks, config.eta, options.cutoff_abs,
                            options.cutoff_rel, want_vectors);
  report.eigenvalues_positive = spectrum.eigenvalues_positive;
  report.sum_positive =
      std::accumulate(report.eigenvalues_positive.begin(),
                      report.eigenvalues_positive.end(), 0.0);
  report.ken = ken_score(report.eigenvalues_positive);
  if (want_vectors) {
    report.modes = extract_modes(spectrum, options.top_k, options.top_r);
    const int available = int(spectrum.eigenvectors.cols());
    if (options.top_k > available)
      report.config.warnings.push_back(
          "top_k " + std::to_string(options.top_k) + " clamped to " +
          std::to_string(available) + " retained modes");
    if (Eigen::Index(options.top_r) > report.n ||
        Eigen::Index(options.top_r) > report.m)
      report.config.warnings.push_back(
          "top_r " + std::to_string(options.top_r) +
          " clamped to the sample count");
  }

  report.config.jitter = spectrum.factorization.jitter;
  report.config.factorization = to_string(spectrum.factorization.path);
  if (spectrum.factorization.path == FactorizationPath::eigen_fallback)
    report.config.warnings.push_back(
        "joint kernel factorization fell back to eigendecomposition");
  if (options.sigma_selection && !options.sigma_selection->satisfied)
    report.config.warnings.push_back(
        "bandwidth selection variance threshold not met; using largest "
        "candidate");

  if (options.rken) {
    const KernelBlocks swapped = swap_roles(blocks);
    const SpectralResult reverse =
        differential_spectrum(swapped, config.eta, options.cutoff_abs,
                              options.cutoff_rel, /*want_vectors=*/false);
    report.rken = ken_score(reverse.eigenvalues_positive);
    if (reverse.factorization.path == FactorizationPath::eigen_fallback)
      report.config.warnings.push_back(
          "swapped-role factorization fell back to eigendecomposition");
  }
  return report;
}

}  // namespace ken
