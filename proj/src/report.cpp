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


#include "ghl/report.hpp"

#include <charconv>
#include <cmath>

namespace ghl {

namespace {

// Non-finite values become null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string shortest(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace

Json model_json(const FittedModel<double> &model, const std::vector<std::string> &column_names) {
  Json j;
  j["family"] = to_string(model.family.kind);
  j["dispersion"] = model.family.dispersion;
  j["link"] = to_string(model.link);
  j["n"] = model.n();
  j["d"] = model.d();
  Json coef = Json::array();
  for (Eigen::Index k = 0; k < model.beta.size(); ++k) {
    Json c;
    c["term"] = k < static_cast<Eigen::Index>(column_names.size()) ? column_names[k] : "x" + std::to_string(k);
    c["estimate"] = number(model.beta(k));
    coef.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coef);
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  // Constant terms free of mu (e.g. -log y! for poisson) are omitted.
  j["log_likelihood_kernel"] = number(model.log_likelihood);
  j["score_norm"] = number(model.score_norm);
  return j;
}

Json test_json(const TestResult<double> &result, const GroupSpec<double> *spec) {
  Json j;
  j["method"] = to_string(result.method);
  j["statistic"] = number(result.statistic);
  j["df"] = result.df ? Json(*result.df) : Json(nullptr);
  j["p_value"] = number(result.p_value);
  j["p_value_method"] = result.p_value_method;
  if (result.rank_used) j["rank_used"] = *result.rank_used;
  if (result.p_value_method == "parametric_bootstrap") {
    j["bootstrap_replicates"] = result.bootstrap_replicates;
    j["bootstrap_failures"] = result.bootstrap_failures;
  }
  if (result.groups) {
    const auto &g = *result.groups;
    j["groups"] = g.observed.size();
    Json table = Json::array();
    for (Eigen::Index k = 0; k < g.observed.size(); ++k) {
      Json row;
      row["group"] = k + 1;
      if (spec) {
        row["lower"] = number(spec->endpoints(k));
        row["upper"] = number(spec->endpoints(k + 1));
      }
      row["n"] = g.counts(k);
      row["observed"] = number(g.observed(k));
      row["expected"] = number(g.expected(k));
      row["variance_sum"] = number(g.variance_sum(k));
      table.push_back(std::move(row));
    }
    j["group_table"] = std::move(table);
  }
  j["warnings"] = result.warnings;
  return j;
}

Json sim_json(const SimResult &result) {
  const auto &s = result.setting;
  Json setting;
  setting["id"] = to_string(s.id);
  setting["n"] = s.n;
  if (s.J) setting["J"] = *s.J;
  if (s.id == SettingId::large_model) setting["d"] = s.d;
  if (s.id == SettingId::power_4) setting["true_link"] = to_string(s.power4_link);
  setting["coefficients"] = std::vector<double>(s.coefficients.data(), s.coefficients.data() + s.coefficients.size());
  setting["covariate_law"] = s.covariate_law;
  setting["fit_family"] = to_string(s.fit_family.kind);
  setting["fit_link"] = to_string(s.fit_link);

  const auto &o = result.options;
  Json options;
  options["reps"] = o.reps;
  options["alpha"] = o.alpha;
  options["groups"] = o.groups;
  options["seed"] = o.seed;
  std::vector<std::string> tests;
  for (auto t : o.tests) tests.emplace_back(to_string(t));
  options["tests"] = tests;
  if (std::find(o.tests.begin(), o.tests.end(), TestMethod::sw) != o.tests.end()) {
    options["sw_boot"] = o.sw_boot;
    options["sw_reps"] = o.sw_reps ? Json(*o.sw_reps) : Json(nullptr);
  }

  Json j;
  j["setting"] = std::move(setting);
  j["options"] = std::move(options);
  j["reps_requested"] = result.reps_requested;
  j["reps_completed"] = result.reps_completed;
  j["reps_discarded"] = result.reps_discarded;
  j["discard_causes"] = result.discard_causes;

  Json rows = Json::array();
  for (const auto &t : result.tests) {
    Json row;
    row["method"] = to_string(t.method);
    row["evaluated"] = t.evaluated;
    row["rejections"] = t.rejections;
    row["rate"] = t.rate;
    row["wilson_95"] = {t.wilson.lower, t.wilson.upper};
    row["statistic_mean"] = number(t.statistic_mean);
    row["statistic_variance"] = number(t.statistic_variance);
    row["mean_df"] = t.mean_df;
    rows.push_back(std::move(row));
  }
  j["tests"] = std::move(rows);

  Json pairs = Json::array();
  const bool power = is_power_setting(s.id);
  for (std::size_t a = 0; a < result.tests.size(); ++a) {
    for (std::size_t b = a + 1; b < result.tests.size(); ++b) {
      const auto m = mcnemar_compare(result.tests[a].flags, result.tests[b].flags);
      Json row;
      row["a"] = to_string(result.tests[a].method);
      row["b"] = to_string(result.tests[b].method);
      row["only_a"] = m.only_a;
      row["only_b"] = m.only_b;
      row["p_value"] = m.p_value;
      if (power) {
        const int k = bonferroni_comparisons(s.id);
        row["bonferroni_comparisons"] = k;
        row["significant"] = m.p_value < bonferroni_level(0.05, k);
      }
      if (m.warning) row["warning"] = *m.warning;
      pairs.push_back(std::move(row));
    }
  }
  j["mcnemar"] = std::move(pairs);
  return j;
}

std::string rejection_csv_header() {
  return "setting,J,d,n,test,evaluated,rejections,rate,wilson_lower,wilson_upper,statistic_mean\n";
}

std::string rejection_csv_rows(const SimResult &result) {
  const auto &s = result.setting;
  std::string out;
  for (const auto &t : result.tests) {
    out += std::string(to_string(s.id)) + "," + (s.J ? shortest(*s.J) : "") + "," +
           (s.id == SettingId::large_model ? std::to_string(s.d) : "") + "," + std::to_string(s.n) + "," +
           std::string(to_string(t.method)) + "," + std::to_string(t.evaluated) + "," +
           std::to_string(t.rejections) + "," + shortest(t.rate) + "," + shortest(t.wilson.lower) + "," +
           shortest(t.wilson.upper) + "," + shortest(t.statistic_mean) + "\n";
  }
  return out;
}

}  // namespace ghl
