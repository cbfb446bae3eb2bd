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


// Command-line front end: fit, gof, simulate, large-model-study.
//
// Exit codes: 0 success, 1 file or parse error, 2 model fit failure,
// 3 goodness-of-fit test failure, 64 usage or precondition violation.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ghl/csv.hpp"
#include "ghl/errors.hpp"
#include "ghl/gof.hpp"
#include "ghl/glm.hpp"
#include "ghl/grouping.hpp"
#include "ghl/report.hpp"
#include "ghl/sim.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kParseFailure = 1;
constexpr int kFitFailure = 2;
constexpr int kTestFailure = 3;
constexpr int kUsage = 64;

struct ExitError {
  int code;
  std::string message;
};

struct ModelArgs {
  std::string input;
  std::string response;
  std::vector<std::string> covariates;
  std::string family = "poisson";
  std::string link;
  double dispersion = 1.0;
  bool intercept = true;
  std::vector<std::string> one_hot;
  bool allow_invalid_pair = false;
};

struct GofArgs {
  std::vector<int> groups = {10};
  std::string grouping = "variance";
  std::string quantile_rule = "nearest";
  std::vector<double> endpoints;
  std::vector<std::string> tests = {"ghl", "naive"};
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int sw_boot = 200;
  unsigned threads = 1;
};

struct SimArgs {
  std::string setting;
  std::string config;
  std::optional<long> n;
  std::optional<std::string> J;
  std::optional<long> d;
  std::optional<std::string> true_link;
  std::optional<int> reps;
  std::optional<int> groups;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> tests;
  std::optional<int> sw_boot;
  std::optional<int> sw_reps;
  std::optional<unsigned> threads;
  std::string csv;
};

struct StudyArgs {
  std::vector<long> d = {2, 10, 20, 30, 40, 50};
  long n = 100;
  int reps = 500;
  int groups = 10;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string csv;
};

void add_model_options(CLI::App *cmd, ModelArgs &m) {
  cmd->add_option("--input", m.input, "CSV file with a header row")->required();
  cmd->add_option("--response", m.response, "Response column")->required();
  cmd->add_option("--covariates", m.covariates,
                  "Terms (columns or A:B interactions); default all other columns, 'none' for intercept only")
      ->delimiter(',');
  cmd->add_option("--family", m.family, "normal, bernoulli, poisson, gamma, inverse_gaussian, negative_binomial");
  cmd->add_option("--link", m.link, "Link function (default: canonical or log)");
  cmd->add_option("--dispersion", m.dispersion, "Known dispersion (NB size, gamma shape, ...)");
  cmd->add_flag("--intercept,!--no-intercept", m.intercept, "Prepend a constant column (default on)");
  cmd->add_option("--one-hot", m.one_hot, "Categorical columns to expand")->delimiter(',');
  cmd->add_flag("--allow-invalid-pair", m.allow_invalid_pair, "Fit family/link pairs outside the supported table");
}

ghl::Link default_link(ghl::Family f) {
  switch (f) {
    case ghl::Family::normal:
      return ghl::Link::identity;
    case ghl::Family::bernoulli:
      return ghl::Link::logit;
    default:
      return ghl::Link::log;
  }
}

struct Loaded {
  ghl::Design design;
  ghl::FamilySpec family{ghl::Family::poisson};
  ghl::Link link = ghl::Link::log;
};

Loaded load(const ModelArgs &m) {
  Loaded out;
  try {
    out.family = ghl::FamilySpec(ghl::parse_family(m.family), m.dispersion);
    out.link = m.link.empty() ? default_link(out.family.kind) : ghl::parse_link(m.link);
  } catch (const ghl::Error &e) {
    throw ExitError{kUsage, e.what()};
  }
  ghl::Table table;
  try {
    table = ghl::read_csv_file(m.input);
  } catch (const ghl::ParseError &e) {
    throw ExitError{kParseFailure, e.what()};
  }
  ghl::DesignSpec spec;
  spec.response = m.response;
  spec.intercept = m.intercept;
  spec.one_hot = m.one_hot;
  if (!(m.covariates.size() == 1 && m.covariates.front() == "none")) spec.terms = m.covariates;
  try {
    out.design = ghl::build_design(table, spec);
  } catch (const ghl::ParseError &e) {
    throw ExitError{kParseFailure, e.what()};
  } catch (const ghl::Error &e) {
    throw ExitError{kUsage, e.what()};
  }
  if (out.design.data.design.cols() == 0) throw ExitError{kUsage, "the model has no columns"};
  return out;
}

ghl::FittedModel<double> fit(const Loaded &l, const ModelArgs &m) {
  ghl::FitOptions<double> options;
  options.allow_invalid_pair = m.allow_invalid_pair;
  try {
    return ghl::fit_irls(l.design.data, l.family, l.link, options);
  } catch (const ghl::InvalidArgument &e) {
    throw ExitError{kUsage, e.what()};
  } catch (const ghl::Error &e) {
    throw ExitError{kFitFailure, std::string("fit failed: ") + e.what()};
  }
}

void emit(const ghl::Json &j, const std::string &path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ExitError{kParseFailure, "cannot write '" + path + "'"};
}

void emit_text(const std::string &text, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ExitError{kParseFailure, "cannot write '" + path + "'"};
}

int cmd_fit(const ModelArgs &m, const std::string &output) {
  const auto loaded = load(m);
  const auto model = fit(loaded, m);
  ghl::Json j;
  j["command"] = "fit";
  j["model"] = ghl::model_json(model, loaded.design.column_names);
  if (!model.converged) j["warnings"] = {"model fit did not converge"};
  emit(j, output);
  return model.converged ? kOk : kFitFailure;
}

int cmd_gof(const ModelArgs &m, const GofArgs &g, const std::string &output) {
  std::vector<ghl::TestMethod> methods;
  try {
    for (const auto &t : g.tests) methods.push_back(ghl::parse_test_method(t));
  } catch (const ghl::Error &e) {
    throw ExitError{kUsage, e.what()};
  }
  if (g.grouping != "variance" && g.grouping != "equal" && g.grouping != "fixed") {
    throw ExitError{kUsage, "--grouping must be variance, equal or fixed"};
  }
  if (g.quantile_rule != "nearest" && g.quantile_rule != "inverse-cdf") {
    throw ExitError{kUsage, "--quantile-rule must be nearest or inverse-cdf"};
  }
  const auto rule = g.quantile_rule == "nearest" ? ghl::QuantileRule::nearest : ghl::QuantileRule::inverse_cdf;
  if (g.grouping == "fixed" && g.endpoints.empty()) throw ExitError{kUsage, "--grouping fixed needs --endpoints"};
  if (!(g.alpha > 0 && g.alpha < 1)) throw ExitError{kUsage, "--alpha must be in (0, 1)"};
  // With fixed endpoints the group count is implied.
  std::vector<int> group_counts = g.grouping == "fixed" ? std::vector<int>{static_cast<int>(g.endpoints.size()) + 1}
                                                        : g.groups;
  for (int G : group_counts) {
    for (auto method : methods) {
      if (method == ghl::TestMethod::sw) continue;
      const int floor = method == ghl::TestMethod::ghl ? 2 : 3;
      if (G < floor) {
        throw ExitError{kUsage, std::string(ghl::to_string(method)) + " needs at least " + std::to_string(floor) +
                                    " groups"};
      }
    }
  }

  const auto loaded = load(m);
  const auto model = fit(loaded, m);

  ghl::Json j;
  j["command"] = "gof";
  j["model"] = ghl::model_json(model, loaded.design.column_names);
  j["alpha"] = g.alpha;
  bool failed = false;
  ghl::Json runs = ghl::Json::array();
  std::optional<ghl::Json> sw_json;
  for (int G : group_counts) {
    ghl::Json run;
    run["groups_requested"] = G;
    run["grouping"] = g.grouping;
    if (g.grouping == "variance") run["quantile_rule"] = g.quantile_rule;
    std::optional<ghl::GroupSpec<double>> spec;
    try {
      if (g.grouping == "variance") spec = ghl::variance_weighted_endpoints(model, G, rule);
      if (g.grouping == "equal") spec = ghl::equal_count_endpoints(model, G);
      if (g.grouping == "fixed") spec = ghl::fixed_endpoints(model, g.endpoints);
    } catch (const ghl::Error &e) {
      run["error"] = e.what();
      failed = true;
      runs.push_back(std::move(run));
      continue;
    }
    ghl::Json tests = ghl::Json::array();
    for (auto method : methods) {
      if (method == ghl::TestMethod::sw) continue;
      try {
        ghl::TestResult<double> r;
        if (method == ghl::TestMethod::ghl) r = ghl::ghl_test(model, loaded.design.data, *spec);
        if (method == ghl::TestMethod::naive_ghl) r = ghl::naive_ghl(model, *spec);
        if (method == ghl::TestMethod::hl_classic) r = ghl::hl_classic(model, *spec);
        auto tj = ghl::test_json(r, &*spec);
        tj["reject"] = r.p_value <= g.alpha;
        tests.push_back(std::move(tj));
      } catch (const ghl::Error &e) {
        tests.push_back({{"method", ghl::to_string(method)}, {"error", e.what()}});
        failed = true;
      }
    }
    run["tests"] = std::move(tests);
    runs.push_back(std::move(run));
  }
  j["grouped_tests"] = std::move(runs);
  // The SW test does not group, so it runs once.
  if (std::find(methods.begin(), methods.end(), ghl::TestMethod::sw) != methods.end()) {
    try {
      ghl::SwOptions sw;
      sw.n_boot = g.sw_boot;
      sw.seed = g.seed;
      sw.threads = g.threads;
      const auto r = ghl::sw_test(model, loaded.design.data, sw);
      auto tj = ghl::test_json(r);
      tj["reject"] = r.p_value <= g.alpha;
      j["sw"] = std::move(tj);
    } catch (const ghl::Error &e) {
      j["sw"] = {{"method", "sw"}, {"error", e.what()}};
      failed = true;
    }
  }
  emit(j, output);
  return failed ? kTestFailure : kOk;
}

ghl::SimConfig sim_config(const SimArgs &a) {
  ghl::SimConfig c;
  std::string text;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw ExitError{kParseFailure, "cannot open '" + a.config + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str() + "\n";
  }
  // Command-line values override the config file.
  auto set = [&](const std::string &key, const std::string &value) { text += key + " = " + value + "\n"; };
  if (!a.setting.empty()) set("setting", a.setting);
  if (a.n) set("n", std::to_string(*a.n));
  if (a.J) set("J", *a.J);
  if (a.d) set("d", std::to_string(*a.d));
  if (a.true_link) set("link", *a.true_link);
  if (a.reps) set("reps", std::to_string(*a.reps));
  if (a.groups) set("G", std::to_string(*a.groups));
  if (a.seed) set("seed", std::to_string(*a.seed));
  if (a.tests) set("tests", *a.tests);
  if (a.sw_boot) set("sw_boot", std::to_string(*a.sw_boot));
  if (a.sw_reps) set("sw_reps", std::to_string(*a.sw_reps));
  if (a.threads) set("threads", std::to_string(*a.threads));
  try {
    c = ghl::parse_sim_config(text);
    // alpha goes through unchanged to keep its exact binary value.
    if (a.alpha) c.options.alpha = *a.alpha;
  } catch (const ghl::Error &e) {
    throw ExitError{kUsage, e.what()};
  }
  return c;
}

int cmd_simulate(const SimArgs &a, const std::string &output) {
  const auto c = sim_config(a);
  ghl::SimResult result;
  try {
    result = ghl::run_replications(c.setting, c.options);
  } catch (const ghl::Error &e) {
    throw ExitError{kUsage, e.what()};
  }
  ghl::Json j;
  j["command"] = "simulate";
  j["result"] = ghl::sim_json(result);
  emit(j, output);
  if (!a.csv.empty()) emit_text(ghl::rejection_csv_header() + ghl::rejection_csv_rows(result), a.csv);
  return kOk;
}

int cmd_large_model(const StudyArgs &a, const std::string &output) {
  ghl::Json j;
  j["command"] = "large-model-study";
  j["groups"] = a.groups;
  j["naive_reference_df"] = a.groups - 2;
  j["ghl_reference_df"] = a.groups - 1;
  ghl::Json table = ghl::Json::array();
  ghl::Json runs = ghl::Json::array();
  std::string csv = ghl::rejection_csv_header();
  for (long d : a.d) {
    ghl::SimResult result;
    try {
      ghl::SimOptions options;
      options.reps = a.reps;
      options.groups = a.groups;
      options.seed = a.seed;
      options.threads = a.threads;
      result = ghl::run_replications(ghl::make_setting(ghl::SettingId::large_model, a.n, std::nullopt, d), options);
    } catch (const ghl::Error &e) {
      throw ExitError{kUsage, e.what()};
    }
    ghl::Json row;
    row["d"] = d;
    for (const auto &t : result.tests) {
      const std::string name(ghl::to_string(t.method));
      row[name + "_mean"] = t.statistic_mean;
      row[name + "_rate"] = t.rate;
    }
    row["reps_completed"] = result.reps_completed;
    table.push_back(std::move(row));
    runs.push_back(ghl::sim_json(result));
    csv += ghl::rejection_csv_rows(result);
  }
  j["table"] = std::move(table);
  j["runs"] = std::move(runs);
  emit(j, output);
  if (!a.csv.empty()) emit_text(csv, a.csv);
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Generalized Hosmer-Lemeshow goodness-of-fit tests for GLMs"};
  app.require_subcommand(1);
  std::string output;

  ModelArgs fit_args;
  auto *fit_cmd = app.add_subcommand("fit", "Fit a GLM by IRLS");
  add_model_options(fit_cmd, fit_args);
  fit_cmd->add_option("--output", output, "Write JSON here instead of stdout");

  ModelArgs gof_model;
  GofArgs gof_args;
  auto *gof_cmd = app.add_subcommand("gof", "Fit a GLM and run goodness-of-fit tests");
  add_model_options(gof_cmd, gof_model);
  gof_cmd->add_option("--groups", gof_args.groups, "Group counts, e.g. 10,18")->delimiter(',');
  gof_cmd->add_option("--grouping", gof_args.grouping, "variance (default), equal or fixed");
  gof_cmd->add_option("--quantile-rule", gof_args.quantile_rule,
                      "Variance grouping endpoint rule: nearest (default) or inverse-cdf");
  gof_cmd->add_option("--endpoints", gof_args.endpoints, "Interior endpoints for --grouping fixed")->delimiter(',');
  gof_cmd->add_option("--tests", gof_args.tests, "ghl, naive, hl, sw")->delimiter(',');
  gof_cmd->add_option("--alpha", gof_args.alpha);
  gof_cmd->add_option("--seed", gof_args.seed, "Seed for the SW bootstrap");
  gof_cmd->add_option("--sw-boot", gof_args.sw_boot, "SW bootstrap replicates");
  gof_cmd->add_option("--threads", gof_args.threads);
  gof_cmd->add_option("--output", output, "Write JSON here instead of stdout");

  SimArgs sim_args;
  auto *sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of one setting");
  sim_cmd->add_option("--setting", sim_args.setting, "null_1..null_6, null_1b..null_3b, power_1..power_4, large_model");
  sim_cmd->add_option("--config", sim_args.config, "key = value config file");
  sim_cmd->add_option("--n", sim_args.n);
  sim_cmd->add_option("--J", sim_args.J, "Deviation index, e.g. 1/2");
  sim_cmd->add_option("--d", sim_args.d, "Parameter count for large_model");
  sim_cmd->add_option("--true-link", sim_args.true_link, "power_4 true link: sqrt or identity");
  sim_cmd->add_option("--reps", sim_args.reps);
  sim_cmd->add_option("--groups", sim_args.groups);
  sim_cmd->add_option("--alpha", sim_args.alpha);
  sim_cmd->add_option("--seed", sim_args.seed);
  sim_cmd->add_option("--tests", sim_args.tests, "Comma list of ghl, naive, hl, sw");
  sim_cmd->add_option("--sw-boot", sim_args.sw_boot);
  sim_cmd->add_option("--sw-reps", sim_args.sw_reps, "Run SW on the first k replications only");
  sim_cmd->add_option("--threads", sim_args.threads);
  sim_cmd->add_option("--output", output, "Write JSON here instead of stdout");
  sim_cmd->add_option("--csv", sim_args.csv, "Also write a rejection-rate CSV");

  StudyArgs study_args;
  auto *study_cmd = app.add_subcommand("large-model-study", "Naive vs GHL statistic means as d grows");
  study_cmd->add_option("--d", study_args.d, "Parameter counts")->delimiter(',');
  study_cmd->add_option("--n", study_args.n);
  study_cmd->add_option("--reps", study_args.reps);
  study_cmd->add_option("--groups", study_args.groups);
  study_cmd->add_option("--seed", study_args.seed);
  study_cmd->add_option("--threads", study_args.threads);
  study_cmd->add_option("--output", output, "Write JSON here instead of stdout");
  study_cmd->add_option("--csv", study_args.csv, "Also write a rejection-rate CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit_args, output);
    if (*gof_cmd) return cmd_gof(gof_model, gof_args, output);
    if (*sim_cmd) return cmd_simulate(sim_args, output);
    if (*study_cmd) return cmd_large_model(study_args, output);
  } catch (const ExitError &e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  }
  return kUsage;
}
