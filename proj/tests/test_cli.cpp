#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "helpers.hpp"
#include "ken.hpp"

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CliResult run_cli(const std::string& args) {
  test::temp_file out("cli_stdout"), err("cli_stderr");
  const std::string command = std::string(KEN_CLI_PATH) + " " + args + " >" +
                              out.path() + " 2>" + err.path();
  const int raw = std::system(command.c_str());
  REQUIRE(raw != -1);
  CliResult result;
  if (WIFEXITED(raw)) result.code = WEXITSTATUS(raw);
  result.out = slurp(out.path());
  result.err = slurp(err.path());
  return result;
}

}  // namespace

TEST_CASE("cli help and usage errors") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("score --help").code == 0);
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);

  test::temp_file test_csv("cli_test"), ref_csv("cli_ref");
  ken::write_csv(test_csv.path(), test::random_set(12, 3, 1));
  ken::write_csv(ref_csv.path(), test::random_set(10, 3, 2));
  const std::string files =
      " --test " + test_csv.path() + " --ref " + ref_csv.path();

  SECTION("missing input file") {
    const CliResult r =
        run_cli("score --test /nonexistent.csv --ref " + ref_csv.path() +
                " --sigma 0.5");
    CHECK(r.code == 1);
    CHECK(!r.err.empty());
  }

  SECTION("sigma and select-sigma are one-of-required") {
    const CliResult neither = run_cli("score" + files);
    CHECK(neither.code == 1);
    CHECK_THAT(neither.err,
               Catch::Matchers::ContainsSubstring("--select-sigma"));
    CHECK(run_cli("score" + files + " --sigma 0.5 --select-sigma").code == 1);
  }

  SECTION("malformed csv reports line and field") {
    test::temp_file bad("cli_bad");
    std::ofstream(bad.path()) << "1.0,2.0\n3.0,oops\n";
    const CliResult r = run_cli("score --test " + bad.path() + " --ref " +
                                ref_csv.path() + " --sigma 0.5");
    CHECK(r.code == 1);
    CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("line 2"));
  }
}

TEST_CASE("cli score emits the report schema") {
  test::temp_file test_csv("cli_test"), ref_csv("cli_ref");
  const ken::EmbeddingSet test_set = test::random_set(20, 3, 5, "test");
  const ken::EmbeddingSet ref_set = test::random_set(25, 3, 6, "ref");
  ken::write_csv(test_csv.path(), test_set);
  ken::write_csv(ref_csv.path(), ref_set);
  const std::string base = "score --test " + test_csv.path() + " --ref " +
                           ref_csv.path() + " --sigma 0.75 --seed 9";

  const CliResult r = run_cli(base);
  REQUIRE(r.code == 0);
  CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("KEN="));
  CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("S="));

  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j["eta"] == 1.0);
  CHECK(j["sigma"] == 0.75);
  CHECK(j["n"] == 20);
  CHECK(j["m"] == 25);
  CHECK(j["rken"].is_null());
  CHECK(j["eigenvalues_positive"].is_array());
  CHECK(j["modes"].is_array());
  CHECK(j["config"]["seed"] == 9);

  SECTION("same command, same bytes") {
    const CliResult again = run_cli(base);
    REQUIRE(again.code == 0);
    CHECK(again.out == r.out);
  }

  SECTION("matches the library evaluation") {
    ken::EvaluateOptions eval;
    eval.seed = 9;
    const ken::NoveltyReport report =
        ken::evaluate(test_set, ref_set, {.sigma = 0.75, .eta = 1.0}, eval);
    CHECK(j["ken"].get<double>() == report.ken);
    CHECK(j["sum_positive"].get<double>() == report.sum_positive);
  }

  SECTION("modes subcommand runs the same pipeline") {
    const CliResult modes = run_cli("modes --test " + test_csv.path() +
                                    " --ref " + ref_csv.path() +
                                    " --sigma 0.75 --seed 9");
    REQUIRE(modes.code == 0);
    CHECK(modes.out == r.out);
  }

  SECTION("rken flag fills the swapped score") {
    const CliResult swapped = run_cli(base + " --rken");
    REQUIRE(swapped.code == 0);
    const nlohmann::json js = nlohmann::json::parse(swapped.out);
    CHECK(js["rken"].is_number());
  }

  SECTION("out file plus quiet") {
    test::temp_file report_path("cli_report");
    const CliResult saved = run_cli(base + " --out " + report_path.path());
    REQUIRE(saved.code == 0);
    CHECK_THAT(saved.out, Catch::Matchers::ContainsSubstring("KEN="));
    CHECK(nlohmann::json::parse(slurp(report_path.path()))["n"] == 20);

    const CliResult quiet =
        run_cli(base + " --out " + report_path.path() + " --quiet");
    REQUIRE(quiet.code == 0);
    CHECK(quiet.out.empty());
  }

  SECTION("oracle cross-check prints its deviation first") {
    const CliResult oracle = run_cli(base + " --oracle");
    REQUIRE(oracle.code == 0);
    REQUIRE_THAT(oracle.out,
                 Catch::Matchers::StartsWith("oracle_deviation="));
    const std::size_t newline = oracle.out.find('\n');
    const double deviation =
        std::stod(oracle.out.substr(17, newline - 17));
    CHECK(deviation <= 1e-6);
    CHECK(nlohmann::json::parse(oracle.out.substr(newline + 1))["n"] == 20);
  }
}

TEST_CASE("cli bandwidth selection") {
  test::temp_file test_csv("cli_test"), ref_csv("cli_ref");
  const ken::ScenarioData data = ken::scenario_alpha_mixture(0.0, 1, 120, 3);
  ken::write_csv(test_csv.path(), data.test);
  ken::write_csv(ref_csv.path(), data.ref);
  test::temp_file json_path("cli_bw");

  const CliResult r = run_cli("bandwidth --test " + test_csv.path() +
                              " --ref " + ref_csv.path() +
                              " --sigma-grid 0.25,0.5,1.0 --trials 4" +
                              " --seed 2 --out " + json_path.path());
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("sigma="));
  CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("satisfied="));
  CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("variance="));

  const nlohmann::json j = nlohmann::json::parse(slurp(json_path.path()));
  CHECK(j["candidates"].size() == 3);
  CHECK(j["variances"].size() >= 1);
  CHECK(j["rng"].is_string());

  SECTION("score --select-sigma records the selection") {
    const CliResult scored = run_cli(
        "score --test " + test_csv.path() + " --ref " + ref_csv.path() +
        " --select-sigma --sigma-grid 0.25,0.5 --trials 4 --seed 2");
    REQUIRE(scored.code == 0);
    const nlohmann::json js = nlohmann::json::parse(scored.out);
    const double sigma = js["sigma"].get<double>();
    CHECK((sigma == 0.25 || sigma == 0.5));
    CHECK(js["config"]["sigma_selection"].is_object());
    CHECK(js["config"]["rng"].is_string());
  }
}

TEST_CASE("cli synth generators write loadable sets") {
  test::temp_file out_test("cli_synth_t"), out_ref("cli_synth_r");

  SECTION("gmm to csv, deterministic bytes") {
    const std::string cmd = "synth gmm --means '0,0;2,2' --weights 3,1"
                            " --std 0.1 --count 40 --seed 4 --out " +
                            out_test.path();
    REQUIRE(run_cli(cmd).code == 0);
    const std::string first = slurp(out_test.path());
    const ken::EmbeddingSet set = ken::load_csv(out_test.path());
    CHECK(set.count() == 40);
    CHECK(set.dim() == 2);
    REQUIRE(run_cli(cmd).code == 0);
    CHECK(slurp(out_test.path()) == first);
  }

  SECTION("gmm rejects zero total weight") {
    CHECK(run_cli("synth gmm --means 0,0 --weights 0 --out " +
                  out_test.path())
              .code == 1);
  }

  SECTION("figure1 column to kenf") {
    const CliResult r = run_cli(
        "synth figure1 --column 2 --count 60 --seed 1 --format kenf"
        " --out-test " + out_test.path() + " --out-ref " + out_ref.path());
    REQUIRE(r.code == 0);
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("column=2"));
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("ken_target="));
    CHECK(ken::load_binary(out_test.path()).count() == 60);
    CHECK(ken::load_binary(out_ref.path()).count() == 60);
  }

  SECTION("figure1 rejects column 7") {
    CHECK(run_cli("synth figure1 --column 7 --out-test " + out_test.path() +
                  " --out-ref " + out_ref.path())
              .code == 1);
  }

  SECTION("alpha mixture") {
    const CliResult r = run_cli(
        "synth alpha --alpha 0.5 --novel-modes 2 --count 50 --seed 2"
        " --out-test " + out_test.path() + " --out-ref " + out_ref.path());
    REQUIRE(r.code == 0);
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("alpha=0.5"));
    CHECK(ken::load_csv(out_test.path()).count() == 50);
    CHECK(run_cli("synth alpha --alpha 1.5 --out-test " + out_test.path() +
                  " --out-ref " + out_ref.path())
              .code == 1);
  }

  SECTION("kenf output feeds straight back into score") {
    REQUIRE(run_cli("synth figure1 --column 5 --count 400 --seed 3"
                    " --format kenf --out-test " + out_test.path() +
                    " --out-ref " + out_ref.path())
                .code == 0);
    const CliResult scored =
        run_cli("score --test " + out_test.path() + " --ref " +
                out_ref.path() + " --sigma 0.5 --quiet");
    REQUIRE(scored.code == 0);
    const nlohmann::json j = nlohmann::json::parse(scored.out);
    CHECK(j["n"] == 400);
    CHECK(j["ken"].get<double>() >= 0.0);
  }
}

TEST_CASE("cli verify agrees with the oracles") {
  const CliResult r =
      run_cli("verify --random --n 6 --m 5 --d 3 --seed 11");
  CHECK(r.code == 0);
  CHECK_THAT(r.out, Catch::Matchers::StartsWith("deviation="));

  SECTION("file-backed verify") {
    test::temp_file test_csv("cli_test"), ref_csv("cli_ref");
    ken::write_csv(test_csv.path(), test::random_set(8, 2, 1));
    ken::write_csv(ref_csv.path(), test::random_set(7, 2, 2));
    CHECK(run_cli("verify --test " + test_csv.path() + " --ref " +
                  ref_csv.path() + " --sigma 0.8 --eta 2")
              .code == 0);
  }

  SECTION("needs files or --random") {
    CHECK(run_cli("verify").code == 1);
  }

  SECTION("a corrupted kernel entry trips the exit-2 path") {
    CHECK(run_cli("verify --random --seed 11 --corrupt").code == 2);
  }
}
