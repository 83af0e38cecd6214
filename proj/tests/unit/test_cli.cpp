#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ikg/cli.hpp"
#include "ikg/config.hpp"

namespace {

namespace fs = std::filesystem;
using ikg::Json;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = ikg::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ikg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    ikg::write_text_file(p, text);
    return p;
  }

  fs::path smoke_config() {
    return write("smoke.json", R"({
      "problem": {"name": "P1", "d": 1},
      "policy": "ikg",
      "sga": {"K": 20},
      "budget": {"B": 6, "grid_points": 2, "replications": 2, "oc_points": 200},
      "seed": 5
    })");
  }

  fs::path dir_;
};

TEST_F(CliTest, ValidateAcceptsAGoodConfig) {
  const auto r = invoke({"validate", "--config", smoke_config().string()});
  EXPECT_EQ(r.code, ikg::kExitOk) << r.err;
  EXPECT_NE(r.out.find("valid: P1_d1"), std::string::npos);
}

TEST_F(CliTest, ValidateNamesTheBadKey) {
  const auto p = write("bad.json", R"({"problem": {"kernel": {"alpha": [-1]}}})");
  const auto r = invoke({"validate", "--config", p.string()});
  EXPECT_EQ(r.code, ikg::kExitInvalid);
  EXPECT_NE(r.err.find("kernel.alpha"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingFileIsAnIoError) {
  const auto r = invoke({"validate", "--config", (dir_ / "absent.json").string()});
  EXPECT_EQ(r.code, ikg::kExitRuntime);
  EXPECT_NE(r.err.find("I/O error"), std::string::npos);
}

TEST_F(CliTest, OverrideAppliesAfterTheFile) {
  const auto r = invoke({"validate", "--config", smoke_config().string(), "--override",
                         "policy=prs", "--override", "problem.d=2"});
  EXPECT_EQ(r.code, ikg::kExitOk) << r.err;
  EXPECT_NE(r.out.find("P1_d2, policies prs"), std::string::npos) << r.out;
  const auto bad = invoke({"validate", "--config", smoke_config().string(), "--override",
                           "sga.step_exponent=2"});
  EXPECT_EQ(bad.code, ikg::kExitInvalid);
}

TEST_F(CliTest, UnknownSubcommandOrFlagIsInvalid) {
  EXPECT_EQ(invoke({"explode"}).code, ikg::kExitInvalid);
  EXPECT_EQ(invoke({"run", "--config", smoke_config().string(), "--bogus"}).code,
            ikg::kExitInvalid);
  EXPECT_EQ(invoke({}).code, ikg::kExitInvalid);
}

TEST_F(CliTest, RunWritesDeterministicOutputs) {
  const auto cfg = smoke_config().string();
  const auto a = invoke({"run", "--config", cfg, "--output", (dir_ / "a").string(), "--workers",
                         "1", "--quiet"});
  const auto b = invoke({"run", "--config", cfg, "--output", (dir_ / "b").string(), "--workers",
                         "3", "--quiet"});
  ASSERT_EQ(a.code, ikg::kExitOk) << a.err;
  ASSERT_EQ(b.code, ikg::kExitOk) << b.err;
  const std::string csv = slurp(dir_ / "a" / "results.csv");
  EXPECT_EQ(csv, slurp(dir_ / "b" / "results.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "summary.csv"), slurp(dir_ / "b" / "summary.csv"));
  // The manifests differ only in the echoed output directory.
  Json ma = Json::parse(slurp(dir_ / "a" / "manifest.json"));
  Json mb = Json::parse(slurp(dir_ / "b" / "manifest.json"));
  EXPECT_EQ(ma["config"]["output"]["dir"], (dir_ / "a").string());
  ma["config"]["output"].erase("dir");
  mb["config"]["output"].erase("dir");
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(csv.rfind("problem,policy,d,replication,budget,oc,wall_ms,n_samples\n", 0), 0u);
  const Json manifest = Json::parse(slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(manifest["seeds"]["master"], 5);
  EXPECT_EQ(manifest["config"]["budget"]["B"], 6.0);
  EXPECT_TRUE(manifest["failures"].empty());
  EXPECT_FALSE(fs::exists(dir_ / "a" / "timing.csv"));
}

TEST_F(CliTest, SeedFlagChangesResults) {
  const auto cfg = smoke_config().string();
  invoke({"run", "--config", cfg, "--output", (dir_ / "a").string(), "--quiet"});
  invoke({"run", "--config", cfg, "--output", (dir_ / "b").string(), "--seed", "6", "--quiet"});
  EXPECT_NE(slurp(dir_ / "a" / "results.csv"), slurp(dir_ / "b" / "results.csv"));
}

TEST_F(CliTest, OverridePolicySwitchesThePolicyColumn) {
  const auto r = invoke({"run", "--config", smoke_config().string(), "--output",
                         (dir_ / "p").string(), "--override", "policy=prs", "--quiet"});
  ASSERT_EQ(r.code, ikg::kExitOk) << r.err;
  const std::string csv = slurp(dir_ / "p" / "results.csv");
  EXPECT_NE(csv.find("P1,prs,1,1,"), std::string::npos);
  EXPECT_EQ(csv.find(",ikg,"), std::string::npos);
}

TEST_F(CliTest, TimingFileWhenRequested) {
  const auto r = invoke({"run", "--config", smoke_config().string(), "--output",
                         (dir_ / "t").string(), "--override", "output.timing=true", "--quiet"});
  ASSERT_EQ(r.code, ikg::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "t" / "timing.csv"));
}

TEST_F(CliTest, FailedReplicationsGiveANonzeroExit) {
  const auto r = invoke({"run", "--config", smoke_config().string(), "--output",
                         (dir_ / "f").string(), "--override", "policy.name=bse", "--override",
                         "policy.bse.m=0", "--quiet"});
  // m = 0 is rejected at validation time.
  EXPECT_EQ(r.code, ikg::kExitInvalid);
}

TEST_F(CliTest, UnwritableOutputIsARuntimeFailure) {
  const auto blocker = write("blocker", "file, not a directory");
  const auto r = invoke({"run", "--config", smoke_config().string(), "--output",
                         (blocker / "sub").string(), "--quiet"});
  EXPECT_EQ(r.code, ikg::kExitRuntime);
}

std::string prior_state_json(int m) {
  Json posteriors = Json::array();
  for (int i = 0; i < m; ++i) {
    posteriors.push_back({{"kernel", {{"family", "se"}, {"tau_sq", 1.0}, {"alpha", {1.0}}}},
                          {"prior_mean", {{"kind", "constant"}, {"value", 0.0}}}});
  }
  return Json{{"posteriors", posteriors}}.dump();
}

TEST_F(CliTest, DecideOnASymmetricPriorPicksTheFirstAlternative) {
  const auto state = write("state.json", prior_state_json(2));
  const auto r = invoke({"decide", "--state", state.string(), "--override", "sga.K=10",
                         "--override", "sga.common_streams=true", "--override", "policy.saa.J=200"});
  ASSERT_EQ(r.code, ikg::kExitOk) << r.err;
  const Json out = Json::parse(r.out);
  EXPECT_EQ(out["alternative"], 1);
  EXPECT_EQ(out["log_ikg"][0], out["log_ikg"][1]);
  EXPECT_EQ(out["sga"]["candidates"].size(), 2u);
  EXPECT_EQ(out["location"].size(), 1u);
}

TEST_F(CliTest, DecideIsRepeatable) {
  const auto state = write("state.json", prior_state_json(3));
  const std::vector<std::string> args{"decide", "--state", state.string(), "--seed", "3",
                                      "--override", "sga.K=10"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  ASSERT_EQ(a.code, ikg::kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NO_THROW(Json::parse(a.out));
}

TEST_F(CliTest, DecideRejectsAMismatchedConfig) {
  const auto state = write("state.json", prior_state_json(2));
  const auto r = invoke({"decide", "--state", state.string(), "--config", smoke_config().string()});
  EXPECT_EQ(r.code, ikg::kExitInvalid);
  EXPECT_NE(r.err.find("problem.M"), std::string::npos);
}

TEST_F(CliTest, OcOfAPriorState) {
  const auto state = write("state.json", prior_state_json(5));
  const auto r = invoke({"oc", "--state", state.string(), "--points", "500"});
  ASSERT_EQ(r.code, ikg::kExitOk) << r.err;
  const Json out = Json::parse(r.out);
  EXPECT_GT(out["oc"].get<double>(), 0.0);
  EXPECT_EQ(out["points"], 500);
}

TEST_F(CliTest, SelftestPasses) {
  const auto r = invoke({"selftest"});
  EXPECT_EQ(r.code, ikg::kExitOk) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
