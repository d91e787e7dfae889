#include <doctest.h>

#include <json.hpp>

#include "cli_pipeline.hpp"
#include "helpers.hpp"

namespace {

const clitest::PipelineResult& pipeline() {
  static testutil::TempDir dir("cli_pipeline");
  static const auto r = clitest::run_pipeline(dir / "run", 1, 60);
  return r;
}

}  // namespace

TEST_CASE("every pipeline step succeeds and writes its sidecar") {
  const auto& r = pipeline();
  for (const auto& c : r.failed) FAIL_CHECK("command failed: " << c);
  for (const char* f : {"cv.json", "model.json", "coeffs.json", "holdout.json", "condition.json", "slice.json",
                        "corr.json", "features.csv", "scores.csv", "labels.csv", "cv.auc.csv", "cv.txt"}) {
    INFO(f);
    CHECK(r.files.count(f) == 1);
  }
  for (const char* f : {"cv.json.config.json", "synth.config.json", "features.csv.config.json"}) {
    INFO(f);
    REQUIRE(r.files.count(f) == 1);
    const auto j = nlohmann::json::parse(r.files.at(f));
    CHECK(j.contains("config_hash"));
    CHECK(j.contains("version"));
  }
}

TEST_CASE("cv report has the requested thresholds") {
  const auto j = nlohmann::json::parse(pipeline().files.at("cv.json"));
  REQUIRE(j.at("thresholds").size() == 3);
  CHECK(j.at("thresholds")[0].at("percentile") == 10.0);
  CHECK(j.at("config").at("seed") == 3);
  CHECK(pipeline().files.at("features.csv").find("hl_01") != std::string::npos);
}

TEST_CASE("exit codes") {
  testutil::TempDir dir("cli_codes");
  const std::string d = dir.path().string() + "/";
  CHECK(clitest::run("cv --bogus") == 1);
  CHECK(clitest::run("") == 1);
  CHECK(clitest::run("validate --transcripts " + d + "none.jsonl --teams " + d + "none.jsonl") == 2);
  REQUIRE(clitest::run("synth --teams 30 --seed 1 --out-dir " + d) == 0);
  CHECK(clitest::run("extract --transcripts " + d + "messages.jsonl --teams " + d + "teams.jsonl --out " + d +
                     "f.csv") == 0);
  CHECK(clitest::run("cv --features " + d + "f.csv --teams " + d + "teams.jsonl --folds 40 --out " + d + "cv.json") ==
        3);
  CHECK(clitest::run("synth --teams 5 --out-dir " + d) == 1);
}

TEST_CASE("extract over the full window equals the unwindowed extraction") {
  testutil::TempDir dir("cli_window");
  const std::string d = dir.path().string() + "/";
  REQUIRE(clitest::run("synth --teams 25 --seed 2 --out-dir " + d) == 0);
  const std::string corpus = "extract --transcripts " + d + "messages.jsonl --teams " + d + "teams.jsonl";
  REQUIRE(clitest::run(corpus + " --out " + d + "full.csv") == 0);
  REQUIRE(clitest::run(corpus + " --window-start 0 --window-end 600 --out " + d + "win.csv") == 0);
  CHECK(testutil::read_file(d + "full.csv") == testutil::read_file(d + "win.csv"));
}
