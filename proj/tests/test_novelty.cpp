#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "ken.hpp"

using Catch::Matchers::WithinAbs;

namespace {

// eta = 1, sigma = 0.5, values-only evaluation for score checks
ken::NoveltyReport score_only(const ken::EmbeddingSet& test,
                              const ken::EmbeddingSet& ref,
                              double eta = 1.0, bool rken = false) {
  ken::EvaluateOptions options;
  options.top_k = 0;
  options.rken = rken;
  return ken::evaluate(test, ref, {.sigma = 0.5, .eta = eta}, options);
}

}  // namespace

TEST_CASE("ken_score unit values") {
  CHECK(ken::ken_score({}) == 0.0);
  CHECK(ken::ken_score({0.7}) == 0.0);
  CHECK(ken::ken_score({1e-9}) == 0.0);

  // uniform four-mode spectrum carries exactly ln 4 nats
  CHECK_THAT(ken::ken_score({0.25, 0.25, 0.25, 0.25}),
             WithinAbs(1.3862943611198906, 1e-12));

  // 0.3*ln(0.4/0.3) + 0.1*ln(0.4/0.1), evaluated exactly
  CHECK_THAT(ken::ken_score({0.3, 0.1}),
             WithinAbs(0.22493405784752335, 1e-12));
}

TEST_CASE("ken_score rejects non-positive input") {
  CHECK_THROWS_AS(ken::ken_score({0.5, 0.0}), ken::invalid_input);
  CHECK_THROWS_AS(ken::ken_score({-0.1}), ken::invalid_input);
  CHECK_THROWS_AS(ken::ken_score({std::nan("")}), ken::invalid_input);
}

TEST_CASE("ken_score symmetry and scale covariance", "[property]") {
  ken::Rng rng(5);
  for (int round = 0; round < 20; ++round) {
    std::vector<double> lambdas(2 + std::size_t(rng.uniform01() * 8));
    for (double& v : lambdas) v = 0.01 + rng.uniform01();

    const double base = ken::ken_score(lambdas);
    CHECK(base >= 0.0);

    std::vector<double> shuffled = lambdas;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK_THAT(ken::ken_score(shuffled), WithinAbs(base, 1e-12));

    for (double c : {0.5, 2.0, 17.0}) {
      std::vector<double> scaled = lambdas;
      for (double& v : scaled) v *= c;
      CHECK_THAT(ken::ken_score(scaled), WithinAbs(c * base, 1e-9 * c + 1e-12));
    }
  }
}

TEST_CASE("entropy identity unit values") {
  SECTION("equal frequencies") {
    const auto result = ken::conditional_entropy_identity_check(
        {0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25});
    CHECK(result.direct == 0.0);
    CHECK(result.via_entropy == 0.0);
  }

  SECTION("disjoint supports carry ln 2") {
    const auto result = ken::conditional_entropy_identity_check(
        {0.5, 0.5, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.5});
    CHECK_THAT(result.direct, WithinAbs(0.6931471805599453, 1e-15));
    CHECK_THAT(result.via_entropy, WithinAbs(0.6931471805599453, 1e-15));
  }

  SECTION("single surviving mode scores zero") {
    const auto result = ken::conditional_entropy_identity_check(
        {0.5, 0.3, 0.2}, {0.2, 0.3, 0.5});
    CHECK(result.direct == 0.0);
    CHECK(result.via_entropy == 0.0);
  }
}

TEST_CASE("entropy identity input validation") {
  CHECK_THROWS_AS(
      ken::conditional_entropy_identity_check({0.5, 0.5}, {1.0}),
      ken::invalid_input);
  CHECK_THROWS_AS(
      ken::conditional_entropy_identity_check({0.5, 0.6}, {0.5, 0.5}),
      ken::invalid_input);
  CHECK_THROWS_AS(
      ken::conditional_entropy_identity_check({1.5, -0.5}, {0.5, 0.5}),
      ken::invalid_input);
}

TEST_CASE("entropy identity holds on random pairs", "[property]") {
  ken::Rng rng(99);
  for (int round = 0; round < 100; ++round) {
    const std::size_t size = 2 + std::size_t(rng.uniform01() * 10);
    auto draw = [&] {
      std::vector<double> p(size);
      double sum = 0.0;
      for (double& v : p) sum += v = rng.uniform01() + 1e-6;
      for (double& v : p) v /= sum;
      return p;
    };
    const auto result =
        ken::conditional_entropy_identity_check(draw(), draw());
    CHECK_THAT(result.direct, WithinAbs(result.via_entropy, 1e-12));
  }
}

TEST_CASE("extract_modes ranks entries and maps reference indices") {
  ken::SpectralResult spectrum;
  spectrum.n = 3;
  spectrum.m = 2;
  spectrum.eigenvalues_positive = {0.5};
  spectrum.eigenvectors.resize(5, 1);
  spectrum.eigenvectors.col(0) << 0.9, 0.1, -0.2, 0.05, 0.0;

  const auto modes = ken::extract_modes(spectrum, 1, 2);
  REQUIRE(modes.size() == 1);
  CHECK(modes[0].rank == 1);
  CHECK(modes[0].eigenvalue == 0.5);

  REQUIRE(modes[0].top_test.size() == 2);
  CHECK(modes[0].top_test[0].index == 0);
  CHECK(modes[0].top_test[0].score == 0.9);
  CHECK(modes[0].top_test[1].index == 1);
  CHECK(modes[0].top_test[1].score == 0.1);

  REQUIRE(modes[0].top_ref.size() == 2);
  CHECK(modes[0].top_ref[0].index == 3);
  CHECK(modes[0].top_ref[0].score == 0.05);
  CHECK(modes[0].top_ref[1].index == 4);
  CHECK(modes[0].top_ref[1].score == 0.0);
}

TEST_CASE("extract_modes clamps top_k to the retained count") {
  ken::SpectralResult spectrum;
  spectrum.n = 2;
  spectrum.m = 2;
  spectrum.eigenvalues_positive = {0.4};
  spectrum.eigenvectors.resize(4, 1);
  spectrum.eigenvectors.col(0) << 0.8, 0.2, -0.3, -0.1;

  CHECK(ken::extract_modes(spectrum, 3, 2).size() == 1);
  CHECK(ken::extract_modes(spectrum, 0, 2).empty());
}

TEST_CASE("report invariants on random instances", "[property]") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const ken::EmbeddingSet test = test::random_set(15, 3, seed, "t");
    const ken::EmbeddingSet ref = test::random_set(12, 3, seed + 500, "r");
    const ken::NoveltyReport report =
        ken::evaluate(test, ref, {.sigma = 1.0, .eta = 1.0});

    CHECK(report.ken >= 0.0);
    const std::size_t k_prime = report.eigenvalues_positive.size();
    if (k_prime <= 1) {
      CHECK(report.ken == 0.0);
    } else {
      CHECK(report.ken <=
            report.sum_positive * std::log(double(k_prime)) + 1e-9);
    }
    const double sum = std::accumulate(report.eigenvalues_positive.begin(),
                                       report.eigenvalues_positive.end(),
                                       0.0);
    CHECK_THAT(report.sum_positive, WithinAbs(sum, 1e-12));
    CHECK(report.sum_positive <= 1.0 + 1e-8);
    CHECK(std::is_sorted(report.eigenvalues_positive.begin(),
                         report.eigenvalues_positive.end(),
                         std::greater<double>()));
  }
}

TEST_CASE("identical inputs score nearly zero") {
  const ken::EmbeddingSet set = test::random_set(40, 2, 3, "same");
  const ken::NoveltyReport report = score_only(set, set);
  CHECK(report.ken <= 0.02);
  CHECK_FALSE(report.rken.has_value());
}

TEST_CASE("novel-mode benchmarks score near their targets", "[scenario]") {
  const Eigen::Index count = 1000;

  const ken::ScenarioData col1 = ken::scenario_figure1(1, count, 7);
  const ken::ScenarioData col2 = ken::scenario_figure1(2, count, 7);
  const double ken1 = score_only(col1.test, col1.ref).ken;
  const double ken2 = score_only(col2.test, col2.ref).ken;

  CHECK_THAT(ken1, WithinAbs(*col1.expected.ken_target, 0.15));
  CHECK_THAT(ken2, WithinAbs(*col2.expected.ken_target, 0.15));
  CHECK(ken2 > ken1);
}

TEST_CASE("extra reference-only modes move rken, not ken", "[scenario]") {
  const Eigen::Index count = 1000;
  const ken::ScenarioData col2 = ken::scenario_figure1(2, count, 7);
  const ken::ScenarioData col6 = ken::scenario_figure1(6, count, 7);

  const double base = score_only(col2.test, col2.ref).ken;
  const ken::NoveltyReport swapped =
      score_only(col6.test, col6.ref, 1.0, /*rken=*/true);

  // sampling noise at this count leaves ~0.07 between the two forward scores
  CHECK_THAT(swapped.ken, WithinAbs(base, 0.12));
  REQUIRE(swapped.rken.has_value());
  CHECK(*swapped.rken - swapped.ken > 0.3);
}

TEST_CASE("disjoint novel modes increase ken monotonically", "[scenario]") {
  const Eigen::Index count = 500;
  double previous = -1.0;
  for (int novel_modes : {1, 2, 3}) {
    const ken::ScenarioData data =
        ken::scenario_alpha_mixture(1.0, novel_modes, count, 13);
    const double ken = score_only(data.test, data.ref).ken;
    CHECK(ken > previous);
    previous = ken;
  }
}

TEST_CASE("swapped roles at high eta surface a missing mode", "[scenario]") {
  // reference covers five well-separated modes, test only four
  const double radius = 1.5, std_dev = 0.05;
  Eigen::MatrixXd centers(5, 2);
  for (int i = 0; i < 5; ++i) {
    const double angle = std::numbers::pi * (0.5 + 0.4 * i);
    centers.row(i) << radius * std::cos(angle), radius * std::sin(angle);
  }

  ken::GmmSpec ref_spec;
  ref_spec.means = centers;
  ref_spec.weights.assign(5, 0.2);
  ref_spec.stds.assign(5, std_dev);
  ref_spec.count = 400;
  ref_spec.seed = 21;

  ken::GmmSpec test_spec;
  test_spec.means = centers.bottomRows(4);
  test_spec.weights.assign(4, 0.25);
  test_spec.stds.assign(4, std_dev);
  test_spec.count = 400;
  test_spec.seed = 22;

  const ken::GmmSample ref = ken::sample_gmm(ref_spec);
  const ken::GmmSample test = ken::sample_gmm(test_spec);

  // roles swapped: the reference plays the test side
  ken::EvaluateOptions options;
  options.top_k = 1;
  options.top_r = 20;
  const ken::NoveltyReport report = ken::evaluate(
      ref.set, test.set, {.sigma = 0.5, .eta = 10.0}, options);

  REQUIRE(!report.modes.empty());
  const Eigen::Vector2d removed = centers.row(0);
  int near = 0;
  for (const ken::ModeEntry& entry : report.modes[0].top_test) {
    const Eigen::Vector2d point = ref.set.vectors.row(entry.index);
    if ((point - removed).norm() <= 3.0 * std_dev) ++near;
  }
  CHECK(near >= 18);  // at least 90% of the top 20
}

TEST_CASE("evaluate reports rken via a full role swap") {
  const ken::EmbeddingSet test = test::random_set(30, 2, 55, "t");
  const ken::EmbeddingSet ref = test::random_set(25, 2, 56, "r");

  const ken::NoveltyReport forward = score_only(test, ref, 2.0, true);
  const ken::NoveltyReport reverse = score_only(ref, test, 2.0, false);
  REQUIRE(forward.rken.has_value());
  CHECK_THAT(*forward.rken, WithinAbs(reverse.ken, 1e-12));
}

TEST_CASE("evaluate warns when mode parameters are clamped") {
  const ken::EmbeddingSet test = test::random_set(4, 2, 61, "t");
  const ken::EmbeddingSet ref = test::random_set(3, 2, 62, "r");

  ken::EvaluateOptions options;
  options.top_k = 50;
  options.top_r = 50;
  const ken::NoveltyReport report =
      ken::evaluate(test, ref, {.sigma = 0.5, .eta = 1.0}, options);

  bool warned_top_k = false, warned_top_r = false;
  for (const std::string& warning : report.config.warnings) {
    warned_top_k = warned_top_k || warning.find("top_k") != std::string::npos;
    warned_top_r = warned_top_r || warning.find("top_r") != std::string::npos;
  }
  CHECK(warned_top_k);
  CHECK(warned_top_r);
}

TEST_CASE("mode members sit near their novel centers", "[scenario]") {
  const Eigen::Index count = 500;
  const ken::ScenarioData data = ken::scenario_figure1(2, count, 3);

  ken::EvaluateOptions options;
  options.top_k = 4;
  options.top_r = 25;
  const ken::NoveltyReport report = ken::evaluate(
      data.test, data.ref, {.sigma = 0.5, .eta = 1.0}, options);
  REQUIRE(report.modes.size() == 4);

  // each detected mode should hug one of the four diagonal centers
  int near = 0, total = 0;
  for (const ken::ModeSummary& mode : report.modes) {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    for (const ken::ModeEntry& entry : mode.top_test)
      center += data.test.vectors.row(entry.index).transpose();
    center /= double(mode.top_test.size());

    // snap to the nearest true center, then count members within 3 std
    Eigen::Index best = 0;
    (data.test_spec.means.rowwise() - center.transpose())
        .rowwise()
        .norm()
        .minCoeff(&best);
    const Eigen::Vector2d truth = data.test_spec.means.row(best);
    for (const ken::ModeEntry& entry : mode.top_test) {
      const Eigen::Vector2d point = data.test.vectors.row(entry.index);
      near += (point - truth).norm() <= 3.0 * 0.05;
      ++total;
    }
  }
  CHECK(near >= (total * 9) / 10);
}
