// Command-line front end: score embeddings, extract modes, pick a bandwidth,
// generate synthetic benchmarks, and cross-check the solver against oracles.
//
// Exit codes: 0 success, 1 usage/I-O/format problems, 2 numerical failures
// (factorization breakdown, oracle disagreement).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ken.hpp"

namespace {

std::string fmt(double v) {
  std::string out;
  ken::detail::append_double(out, v);
  return out;
}

// Strict comma-separated doubles; rejects empty fields and trailing garbage.
std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string field = text.substr(start, end - start);
    double value = 0.0;
    if (!ken::detail::parse_double(field, value))
      throw ken::invalid_input(std::string(what) + ": '" + field +
                               "' is not a number");
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

// Semicolon-separated points, each a comma-separated coordinate list.
Eigen::MatrixXd parse_means(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(';', start), text.size());
    rows.push_back(parse_list(text.substr(start, end - start), "--means"));
    start = end + 1;
  }
  Eigen::MatrixXd means(Eigen::Index(rows.size()),
                        Eigen::Index(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw ken::invalid_input("--means: points must share dimension");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      means(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  }
  return means;
}

// Input format is sniffed from content, not extension: KENF files open with
// their magic, anything else is treated as CSV.
ken::EmbeddingSet load_embeddings(const std::string& path,
                                  const std::string& label) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::string_view(magic, 4) == "KENF")
    return ken::load_binary(path, label);
  return ken::load_csv(path, label);
}

void write_embeddings(const std::string& path, const ken::EmbeddingSet& set,
                      const std::string& format) {
  if (format == "kenf")
    ken::write_binary(path, set);
  else
    ken::write_csv(path, set);
}

struct ScoreOptions {
  std::string test_path;
  std::string ref_path;
  double eta = 1.0;
  double sigma = 1.0;
  bool sigma_given = false;
  bool select_sigma = false;
  std::string sigma_grid = "0.1,0.25,0.5,1.0";
  double variance_threshold = 0.01;
  double subsample = 0.5;
  int trials = 10;
  std::optional<std::int64_t> seed;
  double cutoff_abs = 1e-10;
  double cutoff_rel = 1e-8;
  bool rken = false;
  int top_k = 3;
  int top_r = 10;
  bool oracle = false;
  std::string out;
  bool quiet = false;
};

int cmd_score(const ScoreOptions& opt) {
  const ken::EmbeddingSet test = load_embeddings(opt.test_path, "test");
  const ken::EmbeddingSet ref = load_embeddings(opt.ref_path, "ref");

  ken::EvaluateOptions eval;
  eval.cutoff_abs = opt.cutoff_abs;
  eval.cutoff_rel = opt.cutoff_rel;
  eval.top_k = opt.top_k;
  eval.top_r = opt.top_r;
  eval.rken = opt.rken;
  eval.seed = opt.seed;

  ken::KernelConfig config;
  config.eta = opt.eta;
  if (opt.select_sigma) {
    const std::vector<double> grid = parse_list(opt.sigma_grid, "--sigma-grid");
    const auto seed = std::uint64_t(opt.seed.value_or(0));
    const ken::BandwidthResult chosen = ken::select_bandwidth(
        test, ref, grid, opt.variance_threshold, opt.trials, opt.subsample,
        seed, opt.eta);
    config.sigma = chosen.sigma;
    eval.seed = opt.seed.value_or(0);
    eval.rng = ken::Rng::kId;
    eval.sigma_selection = ken::SigmaSelection{
        chosen.satisfied, chosen.candidates, chosen.variances};
  } else {
    config.sigma = opt.sigma;
  }

  const ken::NoveltyReport report = ken::evaluate(test, ref, config, eval);

  if (opt.oracle) {
    const ken::KernelBlocks blocks = ken::build_blocks(test, ref, config);
    const ken::SpectralResult spectrum = ken::differential_spectrum(
        blocks, config.eta, opt.cutoff_abs, opt.cutoff_rel,
        /*want_vectors=*/false);
    const ken::NonsymmetricSpectrum direct =
        ken::oracle_nonsymmetric(blocks, config.eta);
    double deviation =
        ken::spectrum_deviation(spectrum.eigenvalues_all, direct.real);
    for (double v : direct.imag) deviation = std::max(deviation, std::abs(v));
    std::cout << "oracle_deviation=" << fmt(deviation) << "\n";
    if (deviation > 1e-6) {
      std::cerr << "oracle cross-check failed: deviation " << fmt(deviation)
                << " exceeds 1e-06\n";
      return 2;
    }
  }

  const std::string json = ken::report_to_string(report);
  if (opt.out.empty()) {
    std::cout << json;
    if (!opt.quiet)
      std::cerr << "KEN=" << fmt(report.ken)
                << " k'=" << report.eigenvalues_positive.size()
                << " S=" << fmt(report.sum_positive) << "\n";
  } else {
    ken::write_report(opt.out, report);
    if (!opt.quiet)
      std::cout << "KEN=" << fmt(report.ken)
                << " k'=" << report.eigenvalues_positive.size()
                << " S=" << fmt(report.sum_positive) << "\n";
  }
  return 0;
}

struct BandwidthOptions {
  std::string test_path;
  std::string ref_path;
  double eta = 1.0;
  std::string sigma_grid = "0.1,0.25,0.5,1.0";
  double variance_threshold = 0.01;
  double subsample = 0.5;
  int trials = 10;
  std::int64_t seed = 0;
  std::string out;
  bool quiet = false;
};

int cmd_bandwidth(const BandwidthOptions& opt) {
  const ken::EmbeddingSet test = load_embeddings(opt.test_path, "test");
  const ken::EmbeddingSet ref = load_embeddings(opt.ref_path, "ref");
  const std::vector<double> grid = parse_list(opt.sigma_grid, "--sigma-grid");
  const ken::BandwidthResult result = ken::select_bandwidth(
      test, ref, grid, opt.variance_threshold, opt.trials, opt.subsample,
      std::uint64_t(opt.seed), opt.eta);

  std::cout << "sigma=" << fmt(result.sigma)
            << " satisfied=" << (result.satisfied ? "true" : "false") << "\n";
  if (!opt.quiet)
    for (std::size_t i = 0; i < result.variances.size(); ++i)
      std::cout << "candidate=" << fmt(result.candidates[i])
                << " variance=" << fmt(result.variances[i]) << "\n";

  if (!opt.out.empty()) {
    nlohmann::ordered_json j;
    j["sigma"] = result.sigma;
    j["satisfied"] = result.satisfied;
    j["candidates"] = result.candidates;
    j["variances"] = result.variances;
    j["seed"] = opt.seed;
    j["rng"] = ken::Rng::kId;
    std::ofstream out(opt.out);
    if (!out) throw ken::io_error("cannot open " + opt.out + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw ken::io_error("failed writing " + opt.out);
  }
  return 0;
}

struct SynthGmmOptions {
  std::string weights;
  std::string means;
  std::string stds = "0.05";
  std::int64_t count = 1000;
  std::int64_t seed = 0;
  std::string out;
  std::string format = "csv";
};

int cmd_synth_gmm(const SynthGmmOptions& opt) {
  ken::GmmSpec spec;
  spec.means = parse_means(opt.means);
  spec.weights = parse_list(opt.weights, "--weights");
  spec.stds = parse_list(opt.stds, "--std");
  if (spec.stds.size() == 1)
    spec.stds.assign(std::size_t(spec.means.rows()), spec.stds.front());
  double total = 0.0;
  for (double w : spec.weights) total += w;
  if (!(total > 0))
    throw ken::invalid_input("--weights must have positive total mass");
  for (double& w : spec.weights) w /= total;
  spec.count = opt.count;
  spec.seed = std::uint64_t(opt.seed);
  const ken::GmmSample sample = ken::sample_gmm(spec);
  write_embeddings(opt.out, sample.set, opt.format);
  return 0;
}

struct SynthScenarioOptions {
  int column = 2;
  double alpha = 1.0;
  int novel_modes = 4;
  std::int64_t count = 5000;
  std::int64_t seed = 0;
  std::string out_test;
  std::string out_ref;
  std::string format = "csv";
  bool quiet = false;
};

int cmd_synth_figure1(const SynthScenarioOptions& opt) {
  const ken::ScenarioData data =
      ken::scenario_figure1(opt.column, opt.count, std::uint64_t(opt.seed));
  write_embeddings(opt.out_test, data.test, opt.format);
  write_embeddings(opt.out_ref, data.ref, opt.format);
  if (!opt.quiet) {
    std::cout << "column=" << opt.column << " note=\"" << data.expected.note
              << "\"";
    if (data.expected.ken_target)
      std::cout << " ken_target=" << fmt(*data.expected.ken_target)
                << " tolerance=" << fmt(data.expected.ken_tolerance);
    std::cout << "\n";
  }
  return 0;
}

int cmd_synth_alpha(const SynthScenarioOptions& opt) {
  const ken::ScenarioData data = ken::scenario_alpha_mixture(
      opt.alpha, opt.novel_modes, opt.count, std::uint64_t(opt.seed));
  write_embeddings(opt.out_test, data.test, opt.format);
  write_embeddings(opt.out_ref, data.ref, opt.format);
  if (!opt.quiet)
    std::cout << "alpha=" << fmt(opt.alpha)
              << " novel_modes=" << opt.novel_modes << "\n";
  return 0;
}

struct VerifyOptions {
  std::string test_path;
  std::string ref_path;
  bool random = false;
  std::int64_t n = 6;
  std::int64_t m = 5;
  std::int64_t d = 3;
  std::int64_t seed = 0;
  double eta = 1.0;
  double sigma = 1.0;
  bool corrupt = false;
};

int cmd_verify(const VerifyOptions& opt) {
  ken::EmbeddingSet test, ref;
  if (opt.random) {
    ken::Rng rng(std::uint64_t(opt.seed));
    Eigen::MatrixXd tv(opt.n, opt.d), rv(opt.m, opt.d);
    for (Eigen::Index i = 0; i < tv.rows(); ++i)
      for (Eigen::Index j = 0; j < tv.cols(); ++j) tv(i, j) = rng.gaussian();
    for (Eigen::Index i = 0; i < rv.rows(); ++i)
      for (Eigen::Index j = 0; j < rv.cols(); ++j) rv(i, j) = rng.gaussian();
    test = ken::make_embedding_set(std::move(tv), "test");
    ref = ken::make_embedding_set(std::move(rv), "ref");
  } else {
    if (opt.test_path.empty() || opt.ref_path.empty())
      throw ken::invalid_input(
          "verify needs --test and --ref files, or --random");
    test = load_embeddings(opt.test_path, "test");
    ref = load_embeddings(opt.ref_path, "ref");
  }

  ken::KernelConfig config;
  config.sigma = opt.sigma;
  config.eta = opt.eta;

  double deviation = 0.0;

  // Gaussian kernel: factorized path against the direct non-symmetric solve.
  {
    ken::KernelBlocks blocks = ken::build_blocks(test, ref, config);
    if (opt.corrupt) blocks.kxx(0, 1) += 0.05;
    const ken::SpectralResult spectrum = ken::differential_spectrum(
        blocks, config.eta, 1e-10, 1e-8, /*want_vectors=*/false);
    const ken::NonsymmetricSpectrum direct =
        ken::oracle_nonsymmetric(blocks, config.eta);
    deviation = std::max(
        deviation,
        ken::spectrum_deviation(spectrum.eigenvalues_all, direct.real));
    for (double v : direct.imag) deviation = std::max(deviation, std::abs(v));
  }

  // Linear kernel: same two paths plus the closed-form feature covariance.
  if (test.dim() <= 64) {
    const ken::KernelBlocks blocks = ken::linear_blocks(test, ref);
    const ken::SpectralResult spectrum = ken::differential_spectrum(
        blocks, config.eta, 1e-10, 1e-8, /*want_vectors=*/false);
    const ken::NonsymmetricSpectrum direct =
        ken::oracle_nonsymmetric(blocks, config.eta);
    deviation = std::max(
        deviation,
        ken::spectrum_deviation(spectrum.eigenvalues_all, direct.real));
    for (double v : direct.imag) deviation = std::max(deviation, std::abs(v));
    // Zero padding lines the d feature-space eigenvalues up against the
    // block spectrum's numerical zeros once both are sorted.
    const Eigen::VectorXd feature =
        ken::oracle_linear_feature(test, ref, config.eta);
    deviation = std::max(
        deviation,
        ken::spectrum_deviation(spectrum.eigenvalues_all, feature));
  }

  std::cout << "deviation=" << fmt(deviation) << "\n";
  if (deviation > 1e-6) {
    std::cerr << "oracle agreement failed: deviation " << fmt(deviation)
              << " exceeds 1e-06\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-based entropic novelty scoring between embedding sets"};
  app.require_subcommand(1);

  ScoreOptions score;
  auto add_score_flags = [&](CLI::App* cmd) {
    cmd->add_option("--test", score.test_path, "Test embeddings (CSV or KENF)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--ref", score.ref_path,
                    "Reference embeddings (CSV or KENF)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--eta", score.eta,
                    "Reference discount factor, >= 1 (default 1)");
    auto* sigma =
        cmd->add_option("--sigma", score.sigma, "Gaussian kernel bandwidth");
    auto* select = cmd->add_flag("--select-sigma", score.select_sigma,
                                 "Pick the bandwidth from --sigma-grid");
    sigma->excludes(select);
    select->excludes(sigma);
    cmd->add_option("--sigma-grid", score.sigma_grid,
                    "Ascending candidate bandwidths (default "
                    "0.1,0.25,0.5,1.0)");
    cmd->add_option("--variance-threshold", score.variance_threshold,
                    "KEN variance acceptance threshold (default 0.01)");
    cmd->add_option("--subsample", score.subsample,
                    "Subsample fraction per selection trial (default 0.5)");
    cmd->add_option("--trials", score.trials,
                    "Subsample trials per candidate (default 10)");
    cmd->add_option("--seed", score.seed, "RNG seed, recorded in the report");
    cmd->add_option("--cutoff-abs", score.cutoff_abs,
                    "Absolute eigenvalue cutoff (default 1e-10)");
    cmd->add_option("--cutoff-rel", score.cutoff_rel,
                    "Cutoff relative to the largest eigenvalue "
                    "(default 1e-8)");
    cmd->add_flag("--rken", score.rken,
                  "Also score with test and reference roles swapped");
    cmd->add_option("--top-k", score.top_k,
                    "Modes to summarize in the report (default 3)");
    cmd->add_option("--top-r", score.top_r,
                    "Members listed per mode (default 10)");
    cmd->add_flag("--oracle", score.oracle,
                  "Cross-check eigenvalues against the direct solver "
                  "(expensive)");
    cmd->add_option("--out", score.out,
                    "Write the JSON report here instead of stdout");
    cmd->add_flag("--quiet", score.quiet, "Suppress the summary line");
    return cmd;
  };
  CLI::App* score_cmd =
      add_score_flags(app.add_subcommand("score", "Score test vs reference"));
  CLI::App* modes_cmd = add_score_flags(app.add_subcommand(
      "modes", "Score and report per-mode members (same pipeline as score)"));

  BandwidthOptions bandwidth;
  CLI::App* bandwidth_cmd = app.add_subcommand(
      "bandwidth", "Select a Gaussian kernel bandwidth from a grid");
  bandwidth_cmd->add_option("--test", bandwidth.test_path, "Test embeddings")
      ->required()
      ->check(CLI::ExistingFile);
  bandwidth_cmd
      ->add_option("--ref", bandwidth.ref_path, "Reference embeddings")
      ->required()
      ->check(CLI::ExistingFile);
  bandwidth_cmd->add_option("--eta", bandwidth.eta,
                            "Reference discount factor (default 1)");
  bandwidth_cmd->add_option("--sigma-grid", bandwidth.sigma_grid,
                            "Ascending candidate bandwidths");
  bandwidth_cmd->add_option("--variance-threshold",
                            bandwidth.variance_threshold,
                            "KEN variance acceptance threshold");
  bandwidth_cmd->add_option("--subsample", bandwidth.subsample,
                            "Subsample fraction per trial");
  bandwidth_cmd->add_option("--trials", bandwidth.trials,
                            "Trials per candidate");
  bandwidth_cmd->add_option("--seed", bandwidth.seed, "RNG seed");
  bandwidth_cmd->add_option("--out", bandwidth.out,
                            "Write the selection as JSON");
  bandwidth_cmd->add_flag("--quiet", bandwidth.quiet,
                          "Print only the chosen bandwidth");

  CLI::App* synth = app.add_subcommand(
      "synth", "Generate synthetic Gaussian-mixture benchmarks");
  synth->require_subcommand(1);

  SynthGmmOptions gmm;
  CLI::App* gmm_cmd =
      synth->add_subcommand("gmm", "Sample one Gaussian mixture");
  gmm_cmd->add_option("--weights", gmm.weights,
                      "Component weights, comma separated (normalized)")
      ->required();
  gmm_cmd->add_option("--means", gmm.means,
                      "Centers as 'x,y;x,y;...' (semicolon separated)")
      ->required();
  gmm_cmd->add_option("--std", gmm.stds,
                      "Per-component std, single value or comma list "
                      "(default 0.05)");
  gmm_cmd->add_option("--count", gmm.count, "Samples to draw (default 1000)");
  gmm_cmd->add_option("--seed", gmm.seed, "RNG seed (default 0)");
  gmm_cmd->add_option("--out", gmm.out, "Output path")->required();
  gmm_cmd->add_option("--format", gmm.format, "csv or kenf (default csv)")
      ->check(CLI::IsMember({"csv", "kenf"}));

  SynthScenarioOptions scenario;
  CLI::App* figure1_cmd = synth->add_subcommand(
      "figure1", "Six-column novel-mode benchmark (2-D, std 0.05)");
  figure1_cmd->add_option("--column", scenario.column, "Scenario column 1..6")
      ->required()
      ->check(CLI::Range(1, 6));
  figure1_cmd->add_option("--count", scenario.count,
                          "Samples per side (default 5000)");
  figure1_cmd->add_option("--seed", scenario.seed, "RNG seed (default 0)");
  figure1_cmd->add_option("--out-test", scenario.out_test,
                          "Test output path")
      ->required();
  figure1_cmd->add_option("--out-ref", scenario.out_ref, "Reference output")
      ->required();
  figure1_cmd
      ->add_option("--format", scenario.format, "csv or kenf (default csv)")
      ->check(CLI::IsMember({"csv", "kenf"}));
  figure1_cmd->add_flag("--quiet", scenario.quiet,
                        "Suppress the expected-trend line");

  CLI::App* alpha_cmd = synth->add_subcommand(
      "alpha", "Mixture test set: alpha novel + (1 - alpha) reference");
  alpha_cmd->add_option("--alpha", scenario.alpha, "Novel fraction in [0, 1]")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  alpha_cmd->add_option("--novel-modes", scenario.novel_modes,
                        "Disjoint novel modes 1..4 (default 4)")
      ->check(CLI::Range(1, 4));
  alpha_cmd->add_option("--count", scenario.count,
                        "Samples per side (default 5000)");
  alpha_cmd->add_option("--seed", scenario.seed, "RNG seed (default 0)");
  alpha_cmd->add_option("--out-test", scenario.out_test, "Test output path")
      ->required();
  alpha_cmd->add_option("--out-ref", scenario.out_ref, "Reference output")
      ->required();
  alpha_cmd
      ->add_option("--format", scenario.format, "csv or kenf (default csv)")
      ->check(CLI::IsMember({"csv", "kenf"}));
  alpha_cmd->add_flag("--quiet", scenario.quiet, "Suppress the summary line");

  VerifyOptions verify;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "Cross-check the factorized solver against direct oracles");
  auto* vtest = verify_cmd->add_option("--test", verify.test_path,
                                       "Test embeddings")
                    ->check(CLI::ExistingFile);
  auto* vref = verify_cmd->add_option("--ref", verify.ref_path,
                                      "Reference embeddings")
                   ->check(CLI::ExistingFile);
  auto* vrandom = verify_cmd->add_flag(
      "--random", verify.random, "Verify on seeded standard-normal data");
  vrandom->excludes(vtest)->excludes(vref);
  verify_cmd->add_option("--n", verify.n, "Random test rows (default 6)");
  verify_cmd->add_option("--m", verify.m, "Random reference rows (default 5)");
  verify_cmd->add_option("--d", verify.d, "Random dimension (default 3)");
  verify_cmd->add_option("--seed", verify.seed, "RNG seed (default 0)");
  verify_cmd->add_option("--eta", verify.eta,
                         "Reference discount factor (default 1)");
  verify_cmd->add_option("--sigma", verify.sigma,
                         "Gaussian kernel bandwidth (default 1)");
  verify_cmd
      ->add_flag("--corrupt", verify.corrupt,
                 "Perturb one kernel entry to force a detectable mismatch")
      ->group("");  // negative-control hook, hidden from --help

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(score_cmd) || app.got_subcommand(modes_cmd)) {
      score.sigma_given = score_cmd->count("--sigma") > 0 ||
                          modes_cmd->count("--sigma") > 0;
      if (!score.sigma_given && !score.select_sigma) {
        std::cerr << "either --sigma or --select-sigma is required\n";
        return 1;
      }
      return cmd_score(score);
    }
    if (app.got_subcommand(bandwidth_cmd)) return cmd_bandwidth(bandwidth);
    if (synth->got_subcommand(gmm_cmd)) return cmd_synth_gmm(gmm);
    if (synth->got_subcommand(figure1_cmd)) return cmd_synth_figure1(scenario);
    if (synth->got_subcommand(alpha_cmd)) return cmd_synth_alpha(scenario);
    if (app.got_subcommand(verify_cmd)) return cmd_verify(verify);
  } catch (const ken::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const ken::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
