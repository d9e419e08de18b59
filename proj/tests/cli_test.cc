// Copyright 2026 The vr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vr/cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include "gtest/gtest.h"

namespace vr {
namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json run_json(std::vector<std::string> args) {
  args.push_back("--format");
  args.push_back("json");
  const auto res = run_cli(args);
  EXPECT_EQ(res.code, 0) << res.err;
  return nlohmann::json::parse(res.out);
}

TEST(CliParams, GeneralLdpRow) {
  const auto j = run_json({"params", "general-ldp", "--eps0", "1.0"});
  EXPECT_NEAR(j["p"].get<double>(), std::exp(1.0), 1e-12);
  EXPECT_NEAR(j["beta"].get<double>(),
              (std::exp(1.0) - 1.0) / (std::exp(1.0) + 1.0), 1e-15);
  EXPECT_NEAR(j["q"].get<double>(), std::exp(1.0), 1e-12);
}

TEST(CliParams, BallsIntoBinsRow) {
  const auto res =
      run_cli({"params", "balls-into-bins", "--d", "16", "--s", "2"});
  EXPECT_EQ(res.code, 0);
  EXPECT_NE(res.out.find("p = inf"), std::string::npos);
  EXPECT_NE(res.out.find("beta = 1"), std::string::npos);
  EXPECT_NE(res.out.find("q = 8"), std::string::npos);
}

TEST(CliParams, MatrixFileDerivation) {
  const std::string path = testing::TempDir() + "rr_matrix.json";
  {
    std::ofstream f(path);
    f << R"({"rows": [[0.6666666666666666, 0.3333333333333333],
                      [0.3333333333333333, 0.6666666666666666]]})";
  }
  const auto j = run_json({"params", "--matrix-file", path});
  EXPECT_NEAR(j["p"].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(j["beta"].get<double>(), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(j["q"].get<double>(), 2.0, 1e-12);
}

TEST(CliParams, WitchhatTakesRealShapeParameter) {
  const auto j = run_json({"params", "witchhat", "--B", "2", "--m", "1.5",
                           "--F", "1", "--d01", "1", "--dmax", "2"});
  EXPECT_NEAR(j["p"].get<double>(), std::exp(1.0), 1e-12);
  EXPECT_GT(j["beta"].get<double>(), 0.0);
  // Messages per user must still be integral for multi-message rows.
  const auto bad = run_cli({"params", "cheu", "--f", "0.25", "--n", "100",
                            "--m", "2.5"});
  EXPECT_EQ(bad.code, 2);
}

TEST(CliParams, UnknownMechanismExitsTwo) {
  const auto res = run_cli({"params", "does-not-exist"});
  EXPECT_EQ(res.code, 2);
  EXPECT_NE(res.err.find("E_USAGE"), std::string::npos);
  EXPECT_EQ(res.err.find('\n'), res.err.size() - 1);  // single line
}

TEST(CliUpper, TableValue) {
  const auto j = run_json({"upper", "--mechanism", "general-ldp", "--eps0",
                           "1.0", "--n", "10000", "--delta", "1e-6",
                           "--iters", "20"});
  EXPECT_NEAR(j["eps"].get<double>(), 0.0433, 1e-4 + 1.0 / (1 << 20));
  EXPECT_EQ(j["kind"], "upper");
}

TEST(CliUpper, RawParamsEqualMechanism) {
  const double e = std::exp(1.0);
  std::ostringstream p, beta, q;
  p << std::setprecision(17) << e;
  beta << std::setprecision(17) << (e - 1.0) / (e + 1.0);
  q << std::setprecision(17) << e;
  const auto a = run_json({"upper", "--p", p.str(), "--beta", beta.str(),
                           "--q", q.str(), "--n", "2000", "--delta", "1e-5"});
  const auto b = run_json({"upper", "--mechanism", "general-ldp", "--eps0",
                           "1.0", "--n", "2000", "--delta", "1e-5"});
  EXPECT_DOUBLE_EQ(a["eps"].get<double>(), b["eps"].get<double>());
}

TEST(CliUpper, HalfCloneProbabilityExitsThree) {
  const auto res = run_cli({"upper", "--mechanism", "balls-into-bins", "--d",
                            "4", "--s", "2", "--n", "100", "--delta", "1e-4"});
  EXPECT_EQ(res.code, 3);
  EXPECT_NE(res.err.find("E_UNSUPPORTED"), std::string::npos);
  EXPECT_NE(res.err.find("oracle"), std::string::npos);
}

TEST(CliUpper, MixingRawAndMechanismExitsTwo) {
  const auto res = run_cli({"upper", "--mechanism", "general-ldp", "--eps0",
                            "1.0", "--beta", "0.3", "--q", "2.0", "--n",
                            "100", "--delta", "1e-4"});
  EXPECT_EQ(res.code, 2);
}

TEST(CliLower, ExtremalDesignNearUpper) {
  const std::vector<std::string> base = {
      "--mechanism", "local-hash", "--l", "3",     "--eps0", "1.0986122886681098",
      "--n",         "1000",       "--delta", "1e-6"};
  std::vector<std::string> up_args = {"upper"};
  up_args.insert(up_args.end(), base.begin(), base.end());
  std::vector<std::string> low_args = {"lower"};
  low_args.insert(low_args.end(), base.begin(), base.end());
  const auto up = run_json(up_args);
  const auto low = run_json(low_args);
  EXPECT_EQ(low["kind"], "lower");
  const double gap = up["eps"].get<double>() - low["eps"].get<double>();
  EXPECT_GE(gap, -1e-12);
  EXPECT_LE(gap, 2.0 * up["resolution"].get<double>());
}

TEST(CliClosedForm, AsymptoticPreconditionPath) {
  const auto res =
      run_cli({"closed-form", "asymptotic", "--mechanism", "general-ldp",
               "--eps0", "1.0", "--n", "100", "--delta", "1e-6"});
  EXPECT_EQ(res.code, 0);
  EXPECT_NE(res.out.find("precondition failed:"), std::string::npos);

  const auto ok = run_json({"closed-form", "analytic", "--mechanism",
                            "general-ldp", "--eps0", "1.0", "--n", "100000",
                            "--delta", "1e-6"});
  EXPECT_TRUE(ok["eps"].is_number());
}

TEST(CliCompose, SingleRoundMatchesUpper) {
  const auto upper = run_json({"upper", "--mechanism", "general-ldp",
                               "--eps0", "1.0", "--n", "1000", "--delta",
                               "1e-5"});
  const auto composed = run_json(
      {"compose", "--mechanism", "general-ldp", "--eps0", "1.0", "--n",
       "1000", "--k", "1", "--delta-error", "1e-9", "--eps-error", "0.005",
       "--target-delta", "1e-5"});
  EXPECT_NEAR(composed["eps"].get<double>(), upper["eps"].get<double>(),
              0.01);
  EXPECT_GE(composed["eps"].get<double>(),
            upper["eps"].get<double>() - upper["resolution"].get<double>() -
                1e-9);
}

TEST(CliCompose, UnitGammaEqualsOmitted) {
  const std::vector<std::string> base = {
      "compose", "--mechanism", "general-ldp", "--eps0", "1.0",
      "--n",     "500",         "--k",         "2",      "--delta-error",
      "1e-8",    "--eps-error", "0.05"};
  auto with_gamma = base;
  with_gamma.push_back("--gamma");
  with_gamma.push_back("1.0");
  const auto a = run_cli(base);
  const auto b = run_cli(with_gamma);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(CliCompose, CurveRowsAreEmitted) {
  const auto res = run_cli({"compose", "--mechanism", "general-ldp", "--eps0",
                            "1.0", "--n", "500", "--k", "2", "--delta-error",
                            "1e-8", "--eps-error", "0.05"});
  EXPECT_EQ(res.code, 0);
  EXPECT_NE(res.out.find("eps,delta\n"), std::string::npos);
  EXPECT_GT(std::count(res.out.begin(), res.out.end(), '\n'), 10);
}

TEST(CliSweep, SinglePointEqualsUpper) {
  const auto upper = run_json({"upper", "--mechanism", "krr", "--d", "16",
                               "--eps0", "1.0", "--n", "2000", "--delta",
                               "1e-5"});
  const auto res =
      run_cli({"sweep", "--mechanism", "krr", "--d", "16", "--vary", "eps0",
               "--range", "1.0:1.0:1", "--n", "2000", "--delta", "1e-5"});
  EXPECT_EQ(res.code, 0);
  std::istringstream lines(res.out);
  std::string header_comment, header, row;
  std::getline(lines, header_comment);
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header_comment.rfind("# vr", 0), 0u);
  EXPECT_EQ(header,
            "param,eps_numeric,eps_analytic,eps_asymptotic,"
            "amplification_ratio,log2_ratio");
  const auto first_comma = row.find(',');
  const auto second_comma = row.find(',', first_comma + 1);
  const double eps_numeric = std::stod(
      row.substr(first_comma + 1, second_comma - first_comma - 1));
  EXPECT_DOUBLE_EQ(eps_numeric, upper["eps"].get<double>());
}

TEST(CliSweep, LowerVariationAmplifiesMore) {
  auto eps_of = [](const std::string& mech,
                   const std::vector<std::string>& extra) {
    std::vector<std::string> args = {
        "sweep", "--mechanism", mech,     "--vary",  "eps0",
        "--range", "1.0:1.0:1",  "--n",    "10000",   "--delta", "1e-6"};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto res = run_cli(args);
    EXPECT_EQ(res.code, 0) << res.err;
    std::istringstream lines(res.out);
    std::string skip, row;
    std::getline(lines, skip);
    std::getline(lines, skip);
    std::getline(lines, row);
    // amplification_ratio is the fifth column.
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) pos = row.find(',', pos) + 1;
    return std::stod(row.substr(pos, row.find(',', pos) - pos));
  };
  const double krr_ratio = eps_of("krr", {"--d", "16"});
  const double general_ratio = eps_of("general-ldp", {});
  EXPECT_GT(krr_ratio, general_ratio);
}

TEST(CliSweep, AmplificationRatioDecreasesInEps0) {
  const auto res = run_cli({"sweep", "--mechanism", "general-ldp", "--vary",
                            "eps0", "--range", "0.1:5.0:6", "--n", "10000",
                            "--delta", "1e-6"});
  ASSERT_EQ(res.code, 0) << res.err;
  std::istringstream lines(res.out);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  double prev = kInf;
  int rows = 0;
  while (std::getline(lines, line)) {
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) pos = line.find(',', pos) + 1;
    const double ratio =
        std::stod(line.substr(pos, line.find(',', pos) - pos));
    EXPECT_LT(ratio, prev);
    prev = ratio;
    ++rows;
  }
  EXPECT_EQ(rows, 6);
}

TEST(CliSweep, WritesFileAndReportsIoFailure) {
  const std::string path = testing::TempDir() + "sweep_out.csv";
  const auto ok = run_cli({"sweep", "--mechanism", "general-ldp", "--vary",
                           "eps0", "--range", "0.5:1.0:2", "--n", "500",
                           "--delta", "1e-4", "--out", path});
  EXPECT_EQ(ok.code, 0);
  std::ifstream readback(path);
  EXPECT_TRUE(readback.good());

  const auto bad = run_cli({"sweep", "--mechanism", "general-ldp", "--vary",
                            "eps0", "--range", "0.5:1.0:2", "--n", "500",
                            "--delta", "1e-4", "--out",
                            "/nonexistent-dir/x.csv"});
  EXPECT_EQ(bad.code, 4);
  EXPECT_NE(bad.err.find("E_IO"), std::string::npos);
}

TEST(CliOracle, SmallInstanceMatchesFastPath) {
  const auto fast = run_json({"upper", "--mechanism", "general-ldp", "--eps0",
                              "1.0", "--n", "50", "--delta", "1e-3"});
  const auto exact = run_json({"oracle", "--mechanism", "general-ldp",
                               "--eps0", "1.0", "--n", "50", "--delta",
                               "1e-3"});
  EXPECT_NEAR(exact["eps"].get<double>(), fast["eps"].get<double>(),
              2.0 * fast["resolution"].get<double>());
}

TEST(CliOracle, AcceptsHalfCloneProbability) {
  // The regime the fast path rejects is the oracle's documented use case.
  const auto res = run_cli({"oracle", "--mechanism", "balls-into-bins", "--d",
                            "4", "--s", "2", "--n", "60", "--delta", "1e-2"});
  EXPECT_EQ(res.code, 0) << res.err;
}

TEST(CliOracle, SizeGuardExitsThree) {
  const auto res = run_cli({"oracle", "--mechanism", "general-ldp", "--eps0",
                            "1.0", "--n", "200", "--max-n", "100", "--delta",
                            "1e-3"});
  EXPECT_EQ(res.code, 3);
  EXPECT_NE(res.err.find("E_SIZE"), std::string::npos);
}

TEST(CliDeterminism, RepeatedInvocationsAreByteIdentical) {
  const std::vector<std::string> args = {
      "upper", "--mechanism", "general-ldp", "--eps0", "1.0",
      "--n",   "2000",        "--delta",     "1e-5",   "--format", "json"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.code, 0);
}

TEST(CliConfig, FileSuppliesDefaults) {
  const std::string path = testing::TempDir() + "vr_config.ini";
  {
    std::ofstream f(path);
    f << "trunc-delta=1e-15\nthreads=2\n";
  }
  const auto res = run_cli({"--config", path, "params", "general-ldp",
                            "--eps0", "1.0"});
  EXPECT_EQ(res.code, 0) << res.err;
}

TEST(CliThreads, SameResultAcrossThreadCounts) {
  const std::vector<std::string> base = {
      "upper", "--mechanism", "general-ldp", "--eps0", "1.0",
      "--n",   "20000",       "--delta",     "1e-6",   "--format", "json"};
  auto threaded = base;
  threaded.insert(threaded.begin(), {"--threads", "3"});
  const auto a = run_cli(base);
  const auto b = run_cli(threaded);
  EXPECT_EQ(a.out, b.out);
}

}  // namespace
}  // namespace vr
