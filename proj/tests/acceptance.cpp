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


// Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ghl/gof.hpp"
#include "ghl/sim.hpp"
#include "oracle.hpp"

namespace {

using namespace ghl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

int failures = 0;

void report(int id, bool pass, const std::string &detail, double seconds) {
  std::printf("criterion %d: %s  %s  [%.1fs]\n", id, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename Fn>
void timed(int id, Fn &&fn) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception &e) {
    detail += std::string(" exception: ") + e.what();
  }
  report(id, pass, detail, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

const TestSummary &summary_for(const SimResult &r, TestMethod m) {
  for (const auto &t : r.tests) {
    if (t.method == m) return t;
  }
  throw std::runtime_error("test missing from result");
}

// Null type-1 error for settings 1-3.
bool null_type_one(std::string &detail) {
  const SettingId ids[] = {SettingId::null_1, SettingId::null_2, SettingId::null_3};
  const double ghl_ref[] = {0.053, 0.049, 0.052};
  const double naive_ref[] = {0.058, 0.042, 0.051};
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    SimOptions o;
    o.reps = 1000;
    o.groups = 10;
    o.alpha = 0.05;
    o.seed = 20260001 + k;
    const auto r = run_replications(make_setting(ids[k], 100), o);
    const double g = summary_for(r, TestMethod::ghl).rate;
    const double n = summary_for(r, TestMethod::naive_ghl).rate;
    ok = ok && std::abs(g - ghl_ref[k]) <= 0.02 && std::abs(n - naive_ref[k]) <= 0.02;
    detail += std::string(to_string(ids[k])) + " ghl=" + fmt(g) + " naive=" + fmt(n) +
              " (discarded " + std::to_string(r.reps_discarded) + ") ";
  }
  return ok;
}

// Naive statistic collapses as d grows; GHL stays near G - 1.
bool large_model(std::string &detail) {
  double prev = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (int d : {2, 20, 50}) {
    SimOptions o;
    o.reps = 500;
    o.groups = 10;
    o.seed = 20260010;
    const auto r = run_replications(make_setting(SettingId::large_model, 100, std::nullopt, d), o);
    const double naive = summary_for(r, TestMethod::naive_ghl).statistic_mean;
    const double ghl = summary_for(r, TestMethod::ghl).statistic_mean;
    ok = ok && naive < prev && std::abs(ghl - 9.0) <= 1.0;
    if (d == 50) ok = ok && naive <= 8.0 - 2.0;
    prev = naive;
    detail += "d=" + std::to_string(d) + " naive=" + fmt(naive) + " ghl=" + fmt(ghl) + " ";
  }
  return ok;
}

// Overdispersion: GHL beats naive and SW.
bool overdispersion_power(std::string &detail) {
  SimOptions o;
  o.reps = 1000;
  o.groups = 10;
  o.seed = 20260020;
  o.tests = {TestMethod::ghl, TestMethod::naive_ghl, TestMethod::sw};
  o.sw_boot = 200;
  o.sw_reps = 300;
  const auto r = run_replications(make_setting(SettingId::power_2, 100, 0.5), o);
  const auto &g = summary_for(r, TestMethod::ghl);
  const auto &n = summary_for(r, TestMethod::naive_ghl);
  const auto &s = summary_for(r, TestMethod::sw);
  detail = "ghl=" + fmt(g.rate) + " naive=" + fmt(n.rate) + " sw=" + fmt(s.rate) + " (sw on " +
           std::to_string(s.evaluated) + " reps)";
  return g.rate > n.rate && g.rate > s.rate && g.rate >= 0.5;
}

// Algebraic and numerical oracles on small fixtures.
bool oracle_equivalence(std::string &detail) {
  std::mt19937_64 rng(20260030);
  double worst_forms = 0, worst_ghl = 0, worst_hl = 0, worst_score = 0, worst_fd = 0;
  int fixtures = 0, draws = 0;
  while (fixtures < 50) {
    ++draws;
    const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(25, 40)(rng);
    const Eigen::Index d = std::uniform_int_distribution<Eigen::Index>(2, 4)(rng);
    const bool bern = fixtures % 2 == 1;
    const Family family = bern ? Family::bernoulli : Family::poisson;
    const Link link = bern ? Link::logit : Link::log;
    const auto data = oracle::random_fixture(rng, n, d, family);
    FittedModel<double> model;
    GroupSpec<double> spec;
    try {
      model = fit_irls(data, FamilySpec(family), link);
      if (!model.converged) continue;
      spec = variance_weighted_endpoints(model, std::min<Eigen::Index>(d + 2, 6));
    } catch (const Error &) {
      continue;  // separation or too few distinct predictors: draw again
    }
    ++fixtures;

    const MatrixXd sigma = sigma_n(model, data, spec);
    const auto forms = oracle::sigma_forms(model, data, spec);
    for (const MatrixXd *f : {&forms.first, &forms.second, &forms.third}) {
      worst_forms = std::max(worst_forms, (sigma - *f).cwiseAbs().maxCoeff());
    }

    const double brute = oracle::ghl_brute_force(model, data, spec);
    worst_ghl = std::max(worst_ghl, std::abs(ghl_test(model, data, spec).statistic - brute));

    const VectorXd s = residual_group_vector(model, spec);
    if (bern) {
      const auto hl = hl_classic(model, spec);
      const MatrixXd dm = hl_variance_matrix(*hl.groups, model.n());
      worst_hl = std::max(worst_hl, std::abs(s.dot(dm.inverse() * s) - hl.statistic));
    } else {
      const auto naive = naive_ghl(model, spec);
      const MatrixXd dm = naive_variance_matrix(*naive.groups, model.n());
      worst_hl = std::max(worst_hl, std::abs(s.dot(dm.inverse() * s) - naive.statistic));
    }

    const VectorXd sc = score(data, model.beta, model.family, model.link);
    worst_score = std::max(worst_score, sc.norm());
    const VectorXd fd = oracle::finite_difference_gradient(data, model.beta, model.family, model.link);
    worst_fd = std::max(worst_fd, (fd - sc).cwiseAbs().maxCoeff());
  }
  detail = "fixtures=" + std::to_string(fixtures) + "/" + std::to_string(draws) + " sigma=" + fmt(worst_forms, 2) +
           " ghl=" + fmt(worst_ghl, 2) + " hl=" + fmt(worst_hl, 2) + " score=" + fmt(worst_score, 2) +
           " fd=" + fmt(worst_fd, 2);
  return worst_forms <= 1e-10 && worst_ghl <= 1e-8 && worst_hl <= 1e-10 && worst_score <= 1e-8 && worst_fd <= 1e-6;
}

double penrose_error(const MatrixXd &a, const MatrixXd &p) {
  return std::max({(a * p * a - a).cwiseAbs().maxCoeff(), (p * a * p - p).cwiseAbs().maxCoeff(),
                   (a * p - (a * p).transpose()).cwiseAbs().maxCoeff(),
                   (p * a - (p * a).transpose()).cwiseAbs().maxCoeff()});
}

bool numerics(std::string &detail) {
  double worst_sf = 0;
  for (int df = 1; df <= 30; ++df) {
    for (int k = 0; k <= 200; ++k) {
      const double x = 0.5 * k;
      worst_sf = std::max(worst_sf, std::abs(chi_sq_sf(x, df) - oracle::chi_sq_sf_quadrature(x, df)));
    }
  }

  std::mt19937_64 rng(20260040);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> magnitude(0.05, 10.0);
  double worst_penrose = 0;
  int rank_misses = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int size = std::uniform_int_distribution<int>(1, 12)(rng);
    const int rank = std::uniform_int_distribution<int>(0, size)(rng);
    MatrixXd g(size, size);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
    const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ();
    VectorXd lambda = VectorXd::Zero(size);
    for (int j = 0; j < rank; ++j) lambda(j) = (normal(rng) < 0 ? -1.0 : 1.0) * magnitude(rng);
    const MatrixXd a = q * lambda.asDiagonal() * q.transpose();
    const auto r = pseudoinverse(a);
    worst_penrose = std::max(worst_penrose, penrose_error(a, r.pinv));
    rank_misses += r.rank != rank;
  }

  int full_rank = 0;
  for (int k = 0; k < 200; ++k) {
    auto stream = CounterRng::stream(20260041, k);
    const auto setting = make_setting(SettingId::null_2, 100);
    const auto data = generate(setting, stream);
    const auto model = fit_irls(data, setting.fit_family, setting.fit_link);
    const auto spec = variance_weighted_endpoints(model, 10);
    full_rank += pseudoinverse(sigma_n(model, data, spec)).rank == 9;
  }
  detail = "chi2 sf=" + fmt(worst_sf, 2) + " penrose=" + fmt(worst_penrose, 2) + " (rank misses " +
           std::to_string(rank_misses) + ") rank G-1 on " + std::to_string(full_rank) + "/200";
  return worst_sf <= 1e-10 && worst_penrose <= 1e-7 && full_rank >= 190;
}

bool grouping(std::string &detail) {
  std::mt19937_64 rng(20260050);
  int structural = 0, balanced = 0, inverse_cdf_balanced = 0;
  double worst_ratio = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(40, 150)(rng);
    const Eigen::Index d = std::uniform_int_distribution<Eigen::Index>(2, 4)(rng);
    const Eigen::Index groups = std::uniform_int_distribution<Eigen::Index>(2, 12)(rng);
    const auto data = oracle::random_fixture(rng, n, d, Family::poisson);
    const auto model = fit_irls(data, FamilySpec(Family::poisson), Link::log);
    const auto spec = variance_weighted_endpoints(model, groups);
    const MatrixXd ind = spec.indicator();
    const bool partition = (ind.colwise().sum().array() == 1.0).all() && spec.counts.sum() == n &&
                           (spec.counts.array() >= 1).all();
    structural += partition;
    const auto summary = group_summaries(model, spec);
    const double spread = summary.variance_sum.maxCoeff() - summary.variance_sum.minCoeff();
    const double w_max = model.mu.maxCoeff();
    balanced += spread <= w_max;
    worst_ratio = std::max(worst_ratio, spread / w_max);
    // For reference only: the same check under the inverse-CDF endpoint rule.
    const auto alt = group_summaries(model, variance_weighted_endpoints(model, groups, QuantileRule::inverse_cdf));
    inverse_cdf_balanced += alt.variance_sum.maxCoeff() - alt.variance_sum.minCoeff() <= w_max;
  }
  detail = "partition " + std::to_string(structural) + "/200, spread <= w_max " + std::to_string(balanced) +
           "/200 (worst spread/w_max " + fmt(worst_ratio, 3) + "; inverse-cdf rule would give " +
           std::to_string(inverse_cdf_balanced) + "/200)";
  return structural == 200 && balanced == 200;
}

std::string run_cli(const std::string &args, int &status) {
  const auto out = std::filesystem::temp_directory_path() / ("ghl_acceptance_" + std::to_string(::getpid()));
  const std::string cmd = std::string(GHL_CLI) + " " + args + " --output " + out.string() + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::filesystem::remove(out);
  return ss.str();
}

bool determinism(std::string &detail) {
  const std::string args =
      "simulate --setting null_4 --reps 200 --seed 20260060 --tests ghl,naive,sw --sw-boot 100 --sw-reps 10";
  int s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  const auto a = run_cli(args + " --threads 1", s1);
  const auto b = run_cli(args + " --threads 1", s2);
  const auto c = run_cli(args + " --threads 2", s3);
  const auto d = run_cli(args + " --threads 4", s4);
  const bool ok = s1 == 0 && s2 == 0 && s3 == 0 && s4 == 0 && !a.empty() && a == b && a == c && a == d;
  detail = std::to_string(a.size()) + " bytes; threads 1/1/2/4 identical: " + (ok ? "yes" : "no");
  return ok;
}

}  // namespace

int main() {
  timed(1, null_type_one);
  timed(2, large_model);
  timed(3, overdispersion_power);
  timed(4, oracle_equivalence);
  timed(5, numerics);
  timed(6, grouping);
  timed(7, determinism);
  return failures == 0 ? 0 : 1;
}
