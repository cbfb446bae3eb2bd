// Copyright 2026 The ghl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Runs the ghl executable end to end. Set GHL_UPDATE_GOLDEN=1 to rewrite the
// golden files after an intended output change.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kAlcoholModel =
    " --input " GHL_SOURCE_DIR "/data/alcohol_like.csv --response NUMALL"
    " --covariates NEGEVENT,PREL,AGE,ROSN,STATE,GENDER,DESIRED,ROSN:PREL,AGE:ROSN,"
    "DESIRED:GENDER,DESIRED:AGE,STATE:NEGEVENT";

struct Run {
  int status;
  std::string out;
};

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string &args) {
  const fs::path out = fs::temp_directory_path() / ("ghl_cli_test_" + std::to_string(::getpid()) + ".out");
  const std::string cmd = std::string(GHL_CLI) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  Run r{WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out)};
  fs::remove(out);
  return r;
}

void check_golden(const std::string &name, const std::string &actual) {
  const fs::path path = fs::path(GHL_SOURCE_DIR) / "tests" / "golden" / name;
  if (std::getenv("GHL_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  ASSERT_TRUE(fs::exists(path)) << path;
  EXPECT_EQ(slurp(path), actual) << "golden mismatch: " << name;
}

TEST(Cli, GofOnAlcoholShapedData) {
  const auto r = run("gof" + kAlcoholModel + " --groups 10,18");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["model"]["d"], 13);
  ASSERT_EQ(j["grouped_tests"].size(), 2u);
  const auto &g10 = j["grouped_tests"][0];
  const auto &g18 = j["grouped_tests"][1];
  EXPECT_EQ(g10["groups_requested"], 10);
  EXPECT_EQ(g18["groups_requested"], 18);
  EXPECT_EQ(g10["tests"][0]["group_table"].size(), 10u);
  EXPECT_EQ(g18["tests"][0]["group_table"].size(), 18u);
  // G = 10 does not exceed d = 13; G = 18 does.
  EXPECT_FALSE(g10["tests"][0]["warnings"].empty());
  EXPECT_TRUE(g18["tests"][0]["warnings"].empty());
  check_golden("gof_alcohol.json", r.out);
}

TEST(Cli, NearPerfectFitHasLargePValue) {
  const auto r = run("gof --input " GHL_SOURCE_DIR "/tests/data/near_perfect.csv --response y --groups 10");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  for (const auto &t : j["grouped_tests"][0]["tests"]) EXPECT_GT(t["p_value"].get<double>(), 0.99);
}

TEST(Cli, FitReport) {
  const auto r = run("fit --input " GHL_SOURCE_DIR "/tests/data/near_perfect.csv --response y");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["model"]["family"], "poisson");
  EXPECT_EQ(j["model"]["link"], "log");
  EXPECT_NEAR(j["model"]["coefficients"][1]["estimate"].get<double>(), 0.4, 0.01);
  EXPECT_EQ(j["model"]["coefficients"][1]["term"], "x");
}

TEST(Cli, SimulateIsDeterministicAcrossThreads) {
  const std::string args = "simulate --setting null_2 --reps 60 --seed 17 --tests ghl,naive,sw --sw-boot 100 --sw-reps 4";
  const auto a = run(args + " --threads 1");
  const auto b = run(args + " --threads 3");
  const auto c = run(args + " --threads 1");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  const auto j = json::parse(a.out);
  EXPECT_EQ(j["result"]["reps_completed"].get<int>() + j["result"]["reps_discarded"].get<int>(), 60);
  check_golden("simulate_null_2.json", a.out);
}

TEST(Cli, LargeModelStudy) {
  const auto r = run("large-model-study --d 2,5 --reps 20 --n 60");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["table"].size(), 2u);
  EXPECT_EQ(j["table"][1]["d"], 5);
  EXPECT_TRUE(j["table"][0].contains("ghl_mean"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("gof --input /nonexistent.csv --response y").status, 1);
  EXPECT_EQ(run("gof --input " GHL_SOURCE_DIR "/tests/data/near_perfect.csv --response y --groups 2").status, 64);
  EXPECT_EQ(run("gof --input " GHL_SOURCE_DIR "/tests/data/near_perfect.csv --response nope").status, 64);
  EXPECT_EQ(run("gof --input " GHL_SOURCE_DIR "/tests/data/near_perfect.csv --response y --link logit").status, 64);
  EXPECT_EQ(run("simulate --setting power_1 --J 5").status, 64);
  EXPECT_EQ(run("bogus").status, 64);
  // Twenty groups cannot be formed from ten distinct linear predictors.
  EXPECT_EQ(run("gof --input " GHL_SOURCE_DIR "/tests/data/ten_levels.csv --response y --groups 20").status, 3);
}

}  // namespace
