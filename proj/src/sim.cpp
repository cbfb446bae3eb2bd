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


#include "ghl/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ghl/errors.hpp"
#include "ghl/grouping.hpp"
#include "ghl/numerics.hpp"
#include "ghl/parallel.hpp"

namespace ghl {

namespace {

constexpr std::pair<SettingId, std::string_view> kSettingNames[] = {
    {SettingId::null_1, "null_1"},   {SettingId::null_2, "null_2"},
    {SettingId::null_3, "null_3"},   {SettingId::null_4, "null_4"},
    {SettingId::null_5, "null_5"},   {SettingId::null_6, "null_6"},
    {SettingId::null_1b, "null_1b"}, {SettingId::null_2b, "null_2b"},
    {SettingId::null_3b, "null_3b"}, {SettingId::power_1, "power_1"},
    {SettingId::power_2, "power_2"}, {SettingId::power_3, "power_3"},
    {SettingId::power_4, "power_4"}, {SettingId::large_model, "large_model"},
};

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  std::copy(values.begin(), values.end(), v.data());
  return v;
}

// Draws (X1, X2) with unit variances and correlation rho around (m, m).
std::pair<double, double> correlated_normal_pair(double m, double rho, CounterRng &rng) {
  std::normal_distribution<double> normal;
  const double z1 = normal(rng);
  const double z2 = normal(rng);
  return {m + z1, m + rho * z1 + std::sqrt(1.0 - rho * rho) * z2};
}

std::optional<Link> canonical_link(Family family) {
  switch (family) {
    case Family::normal:
      return Link::identity;
    case Family::bernoulli:
      return Link::logit;
    case Family::poisson:
      return Link::log;
    default:
      return std::nullopt;
  }
}

FittedModel<double> fit_null(const Dataset<double> &data, const SettingSpec &setting) {
  FitOptions<double> options;
  // Noncanonical fits start from the canonical fit's means.
  const auto canonical = canonical_link(setting.fit_family.kind);
  if (canonical && *canonical != setting.fit_link) {
    try {
      const auto start = fit_irls(data, setting.fit_family, *canonical);
      if (start.converged) options.initial_mu = start.mu;
    } catch (const Error &) {
    }
  }
  return fit_irls(data, setting.fit_family, setting.fit_link, options);
}

double parse_number(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    return parse_number(text.substr(0, slash)) / parse_number(text.substr(slash + 1));
  }
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(SettingId id) {
  for (const auto &[key, name] : kSettingNames) {
    if (key == id) return name;
  }
  return "";
}

SettingId parse_setting_id(std::string_view name) {
  for (const auto &[key, label] : kSettingNames) {
    if (label == name) return key;
  }
  throw InvalidArgument("unknown setting '" + std::string(name) + "'");
}

bool is_null_setting(SettingId id) {
  return static_cast<int>(id) <= static_cast<int>(SettingId::null_3b);
}

bool is_power_setting(SettingId id) {
  return id == SettingId::power_1 || id == SettingId::power_2 || id == SettingId::power_3 ||
         id == SettingId::power_4;
}

const std::vector<double> &power_grid(SettingId id) {
  static const std::vector<double> p1 = {4, 6, 8, 10};
  static const std::vector<double> p2 = {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2};
  static const std::vector<double> p3 = {8, 12, 16, 20};
  static const std::vector<double> none;
  switch (id) {
    case SettingId::power_1:
      return p1;
    case SettingId::power_2:
      return p2;
    case SettingId::power_3:
      return p3;
    default:
      return none;
  }
}

Eigen::VectorXd power_coefficients(SettingId id, double J, Link power4_link) {
  switch (id) {
    case SettingId::power_1:
      // Means J, 5, 8 at x = -3, 0, 3.
      return vec({1.61, 0.347 - std::log(J) / 6.0, -0.0633 + std::log(J) / 18.0});
    case SettingId::power_2:
      return vec({1.61, 0.157});
    case SettingId::power_3:
      // Means 5, 5, 7, J at (x, b) = (-3,0), (-3,1), (3,0), (3,1). The
      // tabulated log(J/5) would put 7J/5 at (3,1); log(J/7) honours J.
      return vec({1.78, 0.0561, 0.5 * std::log(J / 7.0), std::log(J / 7.0) / 6.0});
    case SettingId::power_4:
      if (power4_link == Link::sqrt) return vec({2.24, 0.197});
      if (power4_link == Link::identity) return vec({5.0, 1.0});
      throw InvalidArgument("power_4 true link must be sqrt or identity");
    default:
      throw InvalidArgument("not a power setting");
  }
}

SettingSpec make_setting(SettingId id, Eigen::Index n, std::optional<double> J, Eigen::Index d,
                         Link power4_link) {
  SettingSpec s;
  s.id = id;
  s.n = n;
  s.covariate_law = "X ~ U(-3, 3)";
  switch (id) {
    case SettingId::null_1:
      s.coefficients = vec({1.15, 1.15});
      break;
    case SettingId::null_2:
      s.coefficients = vec({1.15, 0.384});
      break;
    case SettingId::null_3:
      s.coefficients = vec({-1.15, 0.384});
      break;
    case SettingId::null_4:
      s.coefficients = vec({1.0, 0.2, -0.2, 0.7});
      s.covariate_law = "B ~ Bernoulli(0.5), (X1, X2) | B ~ N(+-(1, 1), corr 0.5)";
      break;
    case SettingId::null_5:
      s.coefficients = vec({1.70, 0.148, 0.148});
      s.covariate_law = "(X1, X2) ~ N(0, corr 0.7)";
      break;
    case SettingId::null_6:
      s.coefficients = vec({1.15, 0.384});
      s.covariate_law = "X ~ Exp(1)";
      break;
    case SettingId::null_1b:
      s.coefficients = vec({5.16, 1.61});
      break;
    case SettingId::null_2b:
      s.coefficients = vec({2.08, 0.360});
      break;
    case SettingId::null_3b:
      s.coefficients = vec({0.658, 0.114});
      break;
    case SettingId::power_1:
    case SettingId::power_2:
    case SettingId::power_3: {
      if (!J) throw InvalidArgument(std::string(to_string(id)) + " needs J");
      const auto &grid = power_grid(id);
      const bool listed = std::any_of(grid.begin(), grid.end(),
                                      [&](double g) { return std::abs(g - *J) <= 1e-12 * g; });
      if (!listed) throw InvalidArgument("J outside the grid of " + std::string(to_string(id)));
      s.J = J;
      s.coefficients = power_coefficients(id, *J);
      if (id == SettingId::power_3) s.covariate_law = "X ~ U(-3, 3), B ~ Bernoulli(0.5)";
      break;
    }
    case SettingId::power_4:
      s.power4_link = power4_link;
      s.coefficients = power_coefficients(id, 0.0, power4_link);
      s.true_link = power4_link;
      break;
    case SettingId::large_model: {
      if (d < 2) throw InvalidArgument("large model needs d >= 2");
      s.d = d;
      s.coefficients = Eigen::VectorXd::Constant(d, std::sqrt(0.0717 / static_cast<double>(d - 1)));
      s.coefficients(0) = 1.67;
      s.covariate_law = "X ~ N(0, I_{d-1})";
      break;
    }
  }
  if (id == SettingId::null_1b || id == SettingId::null_2b || id == SettingId::null_3b) {
    s.true_link = Link::sqrt;
    s.fit_link = Link::sqrt;
  }
  // Columns of the fitted model.
  Eigen::Index fit_d = 2;
  if (id == SettingId::null_4) fit_d = 4;
  if (id == SettingId::null_5 || id == SettingId::power_3) fit_d = 3;
  if (id == SettingId::large_model) fit_d = d;
  if (n <= fit_d) throw InvalidArgument("n must exceed the number of fitted parameters");
  return s;
}

Dataset<double> generate(const SettingSpec &setting, CounterRng &rng) {
  const Eigen::Index n = setting.n;
  const Eigen::VectorXd &beta = setting.coefficients;
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> normal;
  Dataset<double> data;
  data.response.resize(n);

  auto fill = [&](Eigen::Index cols, auto &&row) {
    data.design.resize(n, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
      data.design(i, 0) = 1.0;
      const double eta = row(i);
      const double mean = inverse_link(setting.true_link, eta);
      data.response(i) = setting.id == SettingId::power_2
                             ? sample_negative_binomial(mean, 1.0 / *setting.J, rng)
                             : sample_poisson(mean, rng);
    }
  };

  switch (setting.id) {
    case SettingId::null_4:
      fill(4, [&](Eigen::Index i) {
        const double b = coin(rng) ? 1.0 : 0.0;
        const auto [x1, x2] = correlated_normal_pair(b > 0 ? 1.0 : -1.0, 0.5, rng);
        data.design.row(i).tail(3) << x1, x2, b;
        return beta(0) + beta(1) * x1 + beta(2) * x2 + beta(3) * b;
      });
      break;
    case SettingId::null_5:
      fill(3, [&](Eigen::Index i) {
        const auto [x1, x2] = correlated_normal_pair(0.0, 0.7, rng);
        data.design.row(i).tail(2) << x1, x2;
        return beta(0) + beta(1) * x1 + beta(2) * x2;
      });
      break;
    case SettingId::null_6:
      fill(2, [&](Eigen::Index i) {
        const double x = std::exponential_distribution<double>(1.0)(rng);
        data.design(i, 1) = x;
        return beta(0) + beta(1) * x;
      });
      break;
    case SettingId::power_1:
      fill(2, [&](Eigen::Index i) {
        const double x = unif(rng);
        data.design(i, 1) = x;
        return beta(0) + beta(1) * x + beta(2) * x * x;
      });
      break;
    case SettingId::power_3:
      fill(3, [&](Eigen::Index i) {
        const double x = unif(rng);
        const double b = coin(rng) ? 1.0 : 0.0;
        data.design.row(i).tail(2) << x, b;
        return beta(0) + beta(1) * x + beta(2) * b + beta(3) * x * b;
      });
      break;
    case SettingId::large_model:
      fill(setting.d, [&](Eigen::Index i) {
        for (Eigen::Index j = 1; j < setting.d; ++j) data.design(i, j) = normal(rng);
        return data.design.row(i).dot(beta);
      });
      break;
    default:
      fill(2, [&](Eigen::Index i) {
        const double x = unif(rng);
        data.design(i, 1) = x;
        return beta(0) + beta(1) * x;
      });
      break;
  }
  return data;
}

Dataset<double> generate_null(const SettingSpec &setting, CounterRng &rng) {
  if (!is_null_setting(setting.id)) throw InvalidArgument("not a null setting");
  return generate(setting, rng);
}

PowerDraw generate_power(const SettingSpec &setting, CounterRng &rng) {
  if (!is_power_setting(setting.id)) throw InvalidArgument("not a power setting");
  return {generate(setting, rng), setting.fit_family, setting.fit_link};
}

Dataset<double> generate_large_model(Eigen::Index d, Eigen::Index n, CounterRng &rng) {
  return generate(make_setting(SettingId::large_model, n, std::nullopt, d), rng);
}

namespace {

struct RepOutcome {
  std::string discard;
  std::vector<std::int8_t> flags;
  std::vector<double> statistics;
  std::vector<int> df;
};

RepOutcome run_one(const SettingSpec &setting, const SimOptions &options, int rep) {
  const std::size_t k = options.tests.size();
  RepOutcome out{"", std::vector<std::int8_t>(k, -1),
                 std::vector<double>(k, std::numeric_limits<double>::quiet_NaN()),
                 std::vector<int>(k, 0)};
  auto rng = CounterRng::stream(options.seed, static_cast<std::uint64_t>(rep));
  const auto data = generate(setting, rng);

  FittedModel<double> model;
  try {
    model = fit_null(data, setting);
  } catch (const DomainEscape &) {
    out.discard = "domain_error";
    return out;
  } catch (const SingularInformation &) {
    out.discard = "singular_fit";
    return out;
  } catch (const Error &) {
    out.discard = "fit_error";
    return out;
  }
  if (!model.converged) {
    out.discard = "nonconvergence";
    return out;
  }

  std::optional<GroupSpec<double>> spec;
  for (std::size_t t = 0; t < k; ++t) {
    const TestMethod method = options.tests[t];
    if (method == TestMethod::sw && options.sw_reps && rep >= *options.sw_reps) continue;
    try {
      if (method != TestMethod::sw && !spec) spec = variance_weighted_endpoints(model, options.groups);
      TestResult<double> r;
      switch (method) {
        case TestMethod::ghl:
          r = ghl_test(model, data, *spec);
          break;
        case TestMethod::naive_ghl:
          r = naive_ghl(model, *spec);
          break;
        case TestMethod::hl_classic:
          r = hl_classic(model, *spec);
          break;
        case TestMethod::sw: {
          SwOptions sw;
          sw.n_boot = options.sw_boot;
          sw.seed = rng.split(1).key();
          r = sw_test(model, data, sw);
          break;
        }
      }
      out.flags[t] = r.p_value <= options.alpha ? 1 : 0;
      out.statistics[t] = r.statistic;
      out.df[t] = r.df.value_or(0);
    } catch (const Error &) {
      out.discard = "test_error:" + std::string(to_string(method));
      return out;
    }
  }
  return out;
}

}  // namespace

SimResult run_replications(const SettingSpec &setting, const SimOptions &options) {
  if (options.reps < 1) throw InvalidArgument("reps must be at least 1");
  if (!(options.alpha > 0.0 && options.alpha <= 1.0)) throw InvalidArgument("alpha must be in (0, 1]");
  if (options.tests.empty()) throw InvalidArgument("no tests requested");

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(options.reps));
  parallel_for(outcomes.size(), options.threads,
               [&](std::size_t rep) { outcomes[rep] = run_one(setting, options, static_cast<int>(rep)); });

  SimResult result;
  result.setting = setting;
  result.options = options;
  result.reps_requested = options.reps;
  for (const auto &o : outcomes) {
    if (o.discard.empty()) {
      ++result.reps_completed;
    } else {
      ++result.reps_discarded;
      ++result.discard_causes[o.discard];
    }
  }
  // Aggregated serially in replication order so results never depend on
  // thread scheduling.
  for (std::size_t t = 0; t < options.tests.size(); ++t) {
    TestSummary s;
    s.method = options.tests[t];
    s.flags.assign(outcomes.size(), -1);
    s.statistics.assign(outcomes.size(), std::numeric_limits<double>::quiet_NaN());
    double sum = 0, sum_sq = 0, df_sum = 0;
    for (std::size_t rep = 0; rep < outcomes.size(); ++rep) {
      const auto &o = outcomes[rep];
      if (!o.discard.empty() || o.flags[t] < 0) continue;
      s.flags[rep] = o.flags[t];
      s.statistics[rep] = o.statistics[t];
      ++s.evaluated;
      s.rejections += o.flags[t];
      sum += o.statistics[t];
      sum_sq += o.statistics[t] * o.statistics[t];
      df_sum += o.df[t];
    }
    if (s.evaluated > 0) {
      const double m = static_cast<double>(s.evaluated);
      s.rate = s.rejections / m;
      s.wilson = wilson_ci(s.rejections, s.evaluated);
      s.statistic_mean = sum / m;
      s.statistic_variance = s.evaluated > 1 ? std::max(0.0, (sum_sq - sum * sum / m) / (m - 1)) : 0.0;
      s.mean_df = df_sum / m;
    }
    result.tests.push_back(std::move(s));
  }
  return result;
}

Interval wilson_ci(int successes, int trials, double level) {
  if (trials < 1 || successes < 0 || successes > trials) throw InvalidArgument("need 0 <= successes <= trials, trials >= 1");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("level must be in (0, 1)");
  const double z = normal_quantile(0.5 + level / 2.0);
  const double n = trials;
  const double p = successes / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) ci.lower = 0.0;
  if (successes == trials) ci.upper = 1.0;
  return ci;
}

McNemarResult mcnemar_compare(const std::vector<std::int8_t> &flags_a,
                              const std::vector<std::int8_t> &flags_b) {
  if (flags_a.size() != flags_b.size()) throw InvalidArgument("flag vectors differ in length");
  McNemarResult r;
  for (std::size_t i = 0; i < flags_a.size(); ++i) {
    if (flags_a[i] < 0 || flags_b[i] < 0) continue;
    r.only_a += flags_a[i] == 1 && flags_b[i] == 0;
    r.only_b += flags_a[i] == 0 && flags_b[i] == 1;
  }
  const int m = r.only_a + r.only_b;
  if (m == 0) {
    r.warning = "no discordant pairs";
    return r;
  }
  const int low = std::min(r.only_a, r.only_b);
  double tail = 0;
  for (int j = 0; j <= low; ++j) {
    tail += std::exp(std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0) - m * std::log(2.0));
  }
  r.p_value = std::min(1.0, 2.0 * tail);
  return r;
}

int bonferroni_comparisons(SettingId id) {
  switch (id) {
    case SettingId::power_1:
    case SettingId::power_2:
    case SettingId::power_3:
      return 24;
    case SettingId::power_4:
      return 12;
    default:
      throw InvalidArgument("Bonferroni counts are defined for power settings");
  }
}

SimConfig parse_sim_config(std::string_view text) {
  std::optional<SettingId> id;
  Eigen::Index n = 100, d = 2;
  std::optional<double> J;
  Link power4_link = Link::sqrt;
  SimOptions options;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(view.substr(0, eq)));
    const std::string_view value = trim(view.substr(eq + 1));
    if (key == "setting") {
      id = parse_setting_id(value);
    } else if (key == "n") {
      n = static_cast<Eigen::Index>(parse_number(value));
    } else if (key == "d") {
      d = static_cast<Eigen::Index>(parse_number(value));
    } else if (key == "J") {
      J = parse_number(value);
    } else if (key == "link") {
      power4_link = parse_link(value);
    } else if (key == "reps") {
      options.reps = static_cast<int>(parse_number(value));
    } else if (key == "G" || key == "groups") {
      options.groups = static_cast<Eigen::Index>(parse_number(value));
    } else if (key == "alpha") {
      options.alpha = parse_number(value);
    } else if (key == "seed") {
      std::uint64_t seed = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (ec != std::errc() || ptr != value.data() + value.size()) throw InvalidArgument("bad seed");
      options.seed = seed;
    } else if (key == "threads") {
      options.threads = static_cast<unsigned>(parse_number(value));
    } else if (key == "sw_boot") {
      options.sw_boot = static_cast<int>(parse_number(value));
    } else if (key == "sw_reps") {
      options.sw_reps = static_cast<int>(parse_number(value));
    } else if (key == "tests") {
      options.tests.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        options.tests.push_back(parse_test_method(trim(rest.substr(0, comma))));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    } else {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!id) throw InvalidArgument("config must name a setting");
  return {make_setting(*id, n, J, d, power4_link), options};
}

}  // namespace ghl
