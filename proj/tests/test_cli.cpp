// Copyright 2026 The subgeo Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::string kCli = SUBGEO_CLI;
const std::string kFix = SUBGEO_FIXTURES;

struct CliResult {
  int code;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = "'" + kCli + "' " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, {}};
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("subgeo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(Cli, ConvertRoundTripAndGammaCsv) {
  const std::string k = (dir_ / "k.json").string(), b = (dir_ / "b.json").string();
  ASSERT_EQ(run("convert --in " + kFix + "/poly_beta.json --to kstar --out " + k).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "k.gamma.csv"));
  ASSERT_EQ(run("convert --in " + k + " --to beta --out " + b).code, 0);
  const json j = json::parse(slurp(b));
  EXPECT_EQ(j["param"], "beta");
  EXPECT_EQ(slurp(dir_ / "k.gamma.csv").rfind("n,gamma\n", 0), 0u);
  // The beta -> kstar -> beta round trip returns the power law 1/s.
  EXPECT_EQ(j["fn"]["form"], "power");
  EXPECT_NEAR(j["fn"]["exponent"].get<double>(), -1.0, 1e-12);
}

TEST_F(Cli, MalformedJsonExitsTwo) {
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << "{ \"sieve\": ";
  EXPECT_EQ(run("convert --in " + bad.string() + " --to kstar --out " + (dir_ / "o.json").string()).code, 2);
  EXPECT_EQ(run("chain --in " + bad.string() + " --report conductance").code, 2);
  EXPECT_EQ(run("chain --in " + kFix + "/two_state.json --report nonsense").code, 2);
}

TEST_F(Cli, CounterexampleProductIsNotRupi) {
  const CliResult r = run("chain --in " + kFix + "/counterexample_k8.json --report rupi --n 2");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["P"]["is_rupi"].get<bool>());
  EXPECT_FALSE(j["product"]["is_rupi"].get<bool>());
  EXPECT_FALSE(j["product"]["witness"].is_null());
}

TEST_F(Cli, TwoStateBetaLowerIncludesExact) {
  const CliResult r = run("chain --in " + kFix + "/two_state.json --report beta-lower --out " + dir_.string());
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_TRUE(j.contains("exact_two_state"));
  EXPECT_TRUE(fs::exists(dir_ / "beta_lower.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "report.json"));
}

TEST_F(Cli, CircleWalkDecayNeedsReversibilization) {
  const CliResult r = run("chain --in " + kFix + "/circle_walk5.json --report decay --n 200");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  // A rotation never forgets; its reversibilization mixes.
  EXPECT_GT(j["P_final"].get<double>(), 0.1);
  EXPECT_LT(j["S_final"].get<double>(), 1e-6);
}

TEST_F(Cli, RwmBoundClosedFormAgreesAndGrowsWithU) {
  const std::string base = "rwm-bound --family product_student --d 10 --eta 2 --eps 0.001";
  const CliResult a = run(base + " --u 1"), b = run(base + " --u 10");
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  const json ja = json::parse(a.out), jb = json::parse(b.out);
  EXPECT_NEAR(ja["closed_vs_quadrature"].get<double>(), 1.0, 0.05);
  EXPECT_GT(jb["bound"].get<double>(), ja["bound"].get<double>());
  EXPECT_EQ(run("rwm-bound --family student_t --d 2 --tau 1").code, 2);
  EXPECT_EQ(run("rwm-bound --family bogus").code, 2);
}

TEST_F(Cli, SimulateIsByteReproducible) {
  const std::string cfg = kFix + "/sim_rwm_student.json";
  const fs::path o1 = dir_ / "a", o2 = dir_ / "b";
  ASSERT_EQ(run("simulate --config " + cfg + " --out " + o1.string()).code, 0);
  ASSERT_EQ(run("simulate --config " + cfg + " --out " + o2.string()).code, 0);
  EXPECT_EQ(slurp(o1 / "trajectories.csv"), slurp(o2 / "trajectories.csv"));
  EXPECT_EQ(slurp(o1 / "summary.json"), slurp(o2 / "summary.json"));
  const json s = json::parse(slurp(o1 / "summary.json"));
  EXPECT_TRUE(s.contains("acceptance"));
}

}  // namespace
