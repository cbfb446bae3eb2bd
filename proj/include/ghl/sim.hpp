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


#ifndef GHL_SIM_HPP_
#define GHL_SIM_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ghl/families.hpp"
#include "ghl/gof.hpp"
#include "ghl/glm.hpp"
#include "ghl/random.hpp"

namespace ghl {

enum class SettingId {
  null_1,
  null_2,
  null_3,
  null_4,
  null_5,
  null_6,
  null_1b,
  null_2b,
  null_3b,
  power_1,
  power_2,
  power_3,
  power_4,
  large_model,
};

std::string_view to_string(SettingId id);
SettingId parse_setting_id(std::string_view name);
bool is_null_setting(SettingId id);
bool is_power_setting(SettingId id);

struct SettingSpec {
  SettingId id = SettingId::null_2;
  Eigen::Index n = 100;
  // Deviation index for power settings 1-3.
  std::optional<double> J;
  // Parameter count for the large model (intercept included).
  Eigen::Index d = 2;
  // True link for power setting 4: sqrt or identity.
  Link power4_link = Link::sqrt;
  Eigen::VectorXd coefficients;
  Link true_link = Link::log;
  // The null model that is fitted.
  FamilySpec fit_family{Family::poisson};
  Link fit_link = Link::log;
  std::string covariate_law;
};

// Fills coefficients, links and covariate law for a named setting; throws
// InvalidArgument for J outside the setting's grid or n <= d.
SettingSpec make_setting(SettingId id, Eigen::Index n, std::optional<double> J = std::nullopt,
                         Eigen::Index d = 2, Link power4_link = Link::sqrt);

const std::vector<double> &power_grid(SettingId id);

// Power-setting coefficients as functions of J.
Eigen::VectorXd power_coefficients(SettingId id, double J, Link power4_link = Link::sqrt);

// Data generated under the setting's true model; design holds the columns
// of the null model that is fitted (intercept first).
Dataset<double> generate(const SettingSpec &setting, CounterRng &rng);

// Per-kind entry points; each checks the setting kind and defers to generate().
Dataset<double> generate_null(const SettingSpec &setting, CounterRng &rng);

struct PowerDraw {
  Dataset<double> data;
  // The (misspecified) null model to fit.
  FamilySpec fit_family{Family::poisson};
  Link fit_link = Link::log;
};
PowerDraw generate_power(const SettingSpec &setting, CounterRng &rng);

Dataset<double> generate_large_model(Eigen::Index d, Eigen::Index n, CounterRng &rng);

struct SimOptions {
  std::vector<TestMethod> tests = {TestMethod::ghl, TestMethod::naive_ghl};
  int reps = 1000;
  double alpha = 0.05;
  Eigen::Index groups = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  int sw_boot = 200;
  // SW is evaluated on the first sw_reps replications only (all when unset).
  std::optional<int> sw_reps;
};

struct Interval {
  double lower = 0;
  double upper = 1;
};

struct TestSummary {
  TestMethod method = TestMethod::ghl;
  int evaluated = 0;
  int rejections = 0;
  double rate = 0;
  Interval wilson;
  double statistic_mean = 0;
  double statistic_variance = 0;
  double mean_df = 0;
  // Per replication: 1 reject, 0 accept, -1 not evaluated or discarded.
  std::vector<std::int8_t> flags;
  std::vector<double> statistics;
};

struct SimResult {
  SettingSpec setting;
  SimOptions options;
  int reps_requested = 0;
  int reps_completed = 0;
  int reps_discarded = 0;
  std::map<std::string, int> discard_causes;
  std::vector<TestSummary> tests;
};

SimResult run_replications(const SettingSpec &setting, const SimOptions &options);

Interval wilson_ci(int successes, int trials, double level = 0.95);

struct McNemarResult {
  int only_a = 0;
  int only_b = 0;
  double p_value = 1;
  std::optional<std::string> warning;
};

// Exact two-sided McNemar test over replications where both flags are set.
McNemarResult mcnemar_compare(const std::vector<std::int8_t> &flags_a,
                              const std::vector<std::int8_t> &flags_b);

// Number of pairwise comparisons accounted for in each power setting.
int bonferroni_comparisons(SettingId id);
inline double bonferroni_level(double alpha, int comparisons) { return alpha / comparisons; }

// Plain-text "key = value" config; '#' starts a comment.
struct SimConfig {
  SettingSpec setting;
  SimOptions options;
};
SimConfig parse_sim_config(std::string_view text);

}  // namespace ghl

#endif  // GHL_SIM_HPP_
