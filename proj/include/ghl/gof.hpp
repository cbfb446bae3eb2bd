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

#ifndef GHL_GOF_HPP_
#define GHL_GOF_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghl/errors.hpp"
#include "ghl/glm.hpp"
#include "ghl/grouping.hpp"
#include "ghl/numerics.hpp"
#include "ghl/parallel.hpp"
#include "ghl/random.hpp"

namespace ghl {

enum class TestMethod { hl_classic, naive_ghl, ghl, sw };

inline std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::hl_classic:
      return "hl_classic";
    case TestMethod::naive_ghl:
      return "naive_ghl";
    case TestMethod::ghl:
      return "ghl";
    case TestMethod::sw:
      return "sw";
  }
  return "";
}

inline TestMethod parse_test_method(std::string_view name) {
  if (name == "hl" || name == "hl_classic") return TestMethod::hl_classic;
  if (name == "naive" || name == "naive_ghl") return TestMethod::naive_ghl;
  if (name == "ghl") return TestMethod::ghl;
  if (name == "sw") return TestMethod::sw;
  throw InvalidArgument("unknown test '" + std::string(name) + "'");
}

template <typename Scalar>
struct TestResult {
  TestMethod method = TestMethod::ghl;
  Scalar statistic = 0;
  std::optional<int> df;
  Scalar p_value = 1;
  std::optional<GroupSummary<Scalar>> groups;
  std::optional<Eigen::Index> rank_used;
  std::vector<std::string> warnings;
  // "chi_squared" or "parametric_bootstrap".
  std::string p_value_method = "chi_squared";
  int bootstrap_replicates = 0;
  int bootstrap_failures = 0;
};

/*
 * S^1_n: s_g = n^{-1/2} sum_i I_i^(g) (y_i - mu_i), the increments of the
 * residual process R^1_n over the group intervals.
 */
template <typename Scalar>
VectorX<Scalar> residual_group_vector(const FittedModel<Scalar> &model,
                                      const GroupSpec<Scalar> &spec) {
  if (spec.n() != model.n()) throw InvalidArgument("group spec built for a different sample");
  VectorX<Scalar> s = VectorX<Scalar>::Zero(spec.groups());
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    s(spec.membership[i]) += model.response(i) - model.mu(i);
  }
  return s / std::sqrt(static_cast<Scalar>(model.n()));
}

// D = diag(n_g pibar_g (1 - pibar_g) / n), the classic HL weight matrix.
template <typename Scalar>
MatrixX<Scalar> hl_variance_matrix(const GroupSummary<Scalar> &summary, Eigen::Index n) {
  const VectorX<Scalar> diag = summary.counts.template cast<Scalar>().array() *
                               summary.mean_fitted.array() *
                               (Scalar(1) - summary.mean_fitted.array()) / static_cast<Scalar>(n);
  return diag.asDiagonal();
}

// D* = diag(V_g / n).
template <typename Scalar>
MatrixX<Scalar> naive_variance_matrix(const GroupSummary<Scalar> &summary, Eigen::Index n) {
  return (summary.variance_sum / static_cast<Scalar>(n)).asDiagonal();
}

namespace details {

template <typename Scalar>
void add_common_warnings(const FittedModel<Scalar> &model, const GroupSpec<Scalar> &spec,
                         std::vector<std::string> &warnings) {
  if (!model.converged) warnings.emplace_back("model fit did not converge");
  if (spec.groups() <= model.d()) {
    warnings.push_back("G = " + std::to_string(spec.groups()) + " does not exceed d = " +
                       std::to_string(model.d()));
  }
  // Ties in eta at an interior endpoint: boundary observations are not
  // separable from their neighbours.
  for (Eigen::Index g = 1; g < spec.groups(); ++g) {
    const Scalar k = spec.endpoints(g);
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < model.n(); ++i) at += model.eta(i) == k;
    if (at > 1) {
      warnings.emplace_back("tied linear predictors at group endpoints");
      break;
    }
  }
}

template <typename Scalar>
void require_naive_groups(const GroupSpec<Scalar> &spec) {
  if (spec.groups() < 3) throw InvalidArgument("G - 2 degrees of freedom requires G >= 3");
}

}  // namespace details

/*
 * Classic Hosmer-Lemeshow statistic for a bernoulli model,
 * sum_g (O_g - E_g)^2 / (n_g pibar_g (1 - pibar_g)), on G - 2 df.
 */
template <typename Scalar>
TestResult<Scalar> hl_classic(const FittedModel<Scalar> &model, const GroupSpec<Scalar> &spec) {
  if (model.family.kind != Family::bernoulli) {
    throw UnsupportedFamily("classic HL is defined for bernoulli responses only");
  }
  details::require_naive_groups(spec);
  TestResult<Scalar> result;
  result.method = TestMethod::hl_classic;
  auto summary = group_summaries(model, spec);
  Scalar stat = 0;
  for (Eigen::Index g = 0; g < spec.groups(); ++g) {
    const Scalar pbar = summary.mean_fitted(g);
    const Scalar denom = summary.counts(g) * pbar * (Scalar(1) - pbar);
    if (!(denom > 0)) throw DegenerateGroup("group mean fitted probability is 0 or 1");
    const Scalar diff = summary.observed(g) - summary.expected(g);
    stat += diff * diff / denom;
  }
  result.statistic = stat;
  result.df = static_cast<int>(spec.groups()) - 2;
  result.p_value = chi_sq_sf(stat, *result.df);
  result.groups = std::move(summary);
  details::add_common_warnings(model, spec, result.warnings);
  return result;
}

// Naive generalization: sum_g (O_g - E_g)^2 / V_g on G - 2 df.
template <typename Scalar>
TestResult<Scalar> naive_ghl(const FittedModel<Scalar> &model, const GroupSpec<Scalar> &spec) {
  details::require_naive_groups(spec);
  TestResult<Scalar> result;
  result.method = TestMethod::naive_ghl;
  auto summary = group_summaries(model, spec);
  Scalar stat = 0;
  for (Eigen::Index g = 0; g < spec.groups(); ++g) {
    if (!(summary.variance_sum(g) > 0)) throw DegenerateGroup("group variance sum is zero");
    const Scalar diff = summary.observed(g) - summary.expected(g);
    stat += diff * diff / summary.variance_sum(g);
  }
  result.statistic = stat;
  result.df = static_cast<int>(spec.groups()) - 2;
  result.p_value = chi_sq_sf(stat, *result.df);
  result.groups = std::move(summary);
  details::add_common_warnings(model, spec, result.warnings);
  return result;
}

/*
 * Sigma_n = (1/n) G* V^{1/2} (I - H) V^{1/2} G*^T.
 *
 * Since V^{1/2} W^{1/2} = diag(m'(eta)), this equals
 *   (1/n) [ diag(V_g) - M (X^T W X)^{-1} M^T ],  M = G* diag(m') X,
 * which needs only G x d and d x d work; the n x n hat matrix is never formed.
 */
template <typename Scalar>
MatrixX<Scalar> sigma_n(const FittedModel<Scalar> &model, const Dataset<Scalar> &data,
                        const GroupSpec<Scalar> &spec, Scalar singular_rcond = Scalar(1e-12)) {
  if (data.n() != model.n() || spec.n() != model.n()) {
    throw InvalidArgument("model, data and groups must describe the same sample");
  }
  const Eigen::Index groups = spec.groups();
  const Eigen::Index d = data.d();
  const VectorX<Scalar> deriv = details::apply_inverse_link_deriv(model.link, model.eta);
  const VectorX<Scalar> var = details::working_variances(model.family, model.link, model.mu);
  const VectorX<Scalar> w = deriv.array().square() / var.array();

  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(groups, d);
  VectorX<Scalar> v_group = VectorX<Scalar>::Zero(groups);
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    const auto g = spec.membership[i];
    m.row(g).noalias() += deriv(i) * data.design.row(i);
    v_group(g) += var(i);
  }
  const auto ldlt = details::checked_factor(details::weighted_gram(data.design, w), singular_rcond);
  MatrixX<Scalar> sigma = -m * ldlt.solve(m.transpose());
  sigma.diagonal() += v_group;
  sigma = (sigma + sigma.transpose()) / Scalar(2);
  return sigma / static_cast<Scalar>(model.n());
}

/*
 * Generalized HL statistic S^T Sigma_n^+ S, referred to chi^2 with
 * rank(Sigma_n) degrees of freedom.
 */
template <typename Scalar>
TestResult<Scalar> ghl_test(const FittedModel<Scalar> &model, const Dataset<Scalar> &data,
                            const GroupSpec<Scalar> &spec,
                            const PseudoinverseOptions &pinv_options = {}) {
  TestResult<Scalar> result;
  result.method = TestMethod::ghl;
  const MatrixX<Scalar> sigma = sigma_n(model, data, spec);
  const auto pinv = pseudoinverse(sigma, pinv_options);
  if (pinv.rank == 0) throw DegenerateRank("Sigma_n has rank 0");
  const VectorX<Scalar> s = residual_group_vector(model, spec);
  result.statistic = std::max(Scalar(0), s.dot(pinv.pinv * s));
  result.rank_used = pinv.rank;
  result.df = static_cast<int>(pinv.rank);
  result.p_value = chi_sq_sf(result.statistic, *result.df);
  result.groups = group_summaries(model, spec);
  if (pinv.rank != spec.groups() - 1) {
    result.warnings.push_back("rank(Sigma_n) = " + std::to_string(pinv.rank) + " differs from G - 1 = " +
                              std::to_string(spec.groups() - 1));
  }
  details::add_common_warnings(model, spec, result.warnings);
  return result;
}

/*
 * Su-Wei statistic sup_u |n^{-1/2} sum_i 1(x_i <= u) r_i| over the observed
 * covariate points, comparing componentwise on the non-constant design
 * columns. With a single such column this is the largest absolute cumulative
 * residual over the sorted covariate (ties summed together); with two it is
 * the exact supremum over all corners; beyond that only the n observed
 * covariate vectors are searched.
 */
template <typename Scalar>
Scalar sw_statistic(const MatrixX<Scalar> &design, const VectorX<Scalar> &residuals) {
  const Eigen::Index n = design.rows();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    if ((design.col(j).array() != design(0, j)).any()) cols.push_back(j);
  }
  const Scalar scale = std::sqrt(static_cast<Scalar>(n));
  if (cols.empty()) return std::abs(residuals.sum()) / scale;

  Scalar best = 0;
  if (cols.size() == 1) {
    const auto x = design.col(cols.front());
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a) < x(b); });
    Scalar cum = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      cum += residuals(order[k]);
      if (k + 1 < n && x(order[k + 1]) == x(order[k])) continue;
      best = std::max(best, std::abs(cum));
    }
    return best / scale;
  }

  if (cols.size() == 2) {
    // Exact over R^2: the supremum sits on a corner (x_a1, x_b2). Sweep x1
    // upward, accumulate residuals by x2 rank and scan prefix sums.
    const auto x1 = design.col(cols[0]);
    const auto x2 = design.col(cols[1]);
    std::vector<Scalar> levels(x2.data(), x2.data() + n);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::vector<Eigen::Index> rank(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      rank[i] = std::lower_bound(levels.begin(), levels.end(), x2(i)) - levels.begin();
    }
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x1(a) < x1(b); });
    std::vector<Scalar> acc(levels.size(), Scalar(0));
    for (Eigen::Index k = 0; k < n; ++k) {
      acc[rank[order[k]]] += residuals(order[k]);
      if (k + 1 < n && x1(order[k + 1]) == x1(order[k])) continue;
      Scalar cum = 0;
      for (const Scalar a : acc) {
        cum += a;
        best = std::max(best, std::abs(cum));
      }
    }
    return best / scale;
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar sum = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      bool below = true;
      for (auto c : cols) {
        if (design(i, c) > design(j, c)) {
          below = false;
          break;
        }
      }
      if (below) sum += residuals(i);
    }
    best = std::max(best, std::abs(sum));
  }
  return best / scale;
}

struct SwOptions {
  int n_boot = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/*
 * Su-Wei test with a parametric-bootstrap p-value: responses are redrawn from
 * the fitted model, the model is refitted (warm-started at beta-hat) and the
 * statistic recomputed. p = (r + 1) / (B + 1) over successful replicates,
 * where r counts replicate statistics >= the observed one.
 */
template <typename Scalar>
TestResult<Scalar> sw_test(const FittedModel<Scalar> &model, const Dataset<Scalar> &data,
                           const SwOptions &options = {}) {
  if (options.n_boot < 100) throw InvalidArgument("SW bootstrap needs at least 100 replicates");
  if (data.n() != model.n()) throw InvalidArgument("model and data describe different samples");
  TestResult<Scalar> result;
  result.method = TestMethod::sw;
  result.p_value_method = "parametric_bootstrap";
  const VectorX<Scalar> resid = model.response - model.mu;
  result.statistic = sw_statistic(data.design, resid);

  std::vector<Scalar> boot(static_cast<std::size_t>(options.n_boot));
  std::vector<char> ok(boot.size(), 0);
  FitOptions<Scalar> fit_options;
  fit_options.initial_beta = model.beta;
  fit_options.allow_invalid_pair = true;
  parallel_for(boot.size(), options.threads, [&](std::size_t b) {
    auto rng = CounterRng::stream(options.seed, b);
    Dataset<Scalar> sim{data.design, VectorX<Scalar>(model.n())};
    for (Eigen::Index i = 0; i < model.n(); ++i) {
      sim.response(i) = static_cast<Scalar>(sample_response(model.family, static_cast<double>(model.mu(i)), rng));
    }
    try {
      const auto refit = fit_irls(sim, model.family, model.link, fit_options);
      if (!refit.converged) return;
      boot[b] = sw_statistic(sim.design, VectorX<Scalar>(sim.response - refit.mu));
      ok[b] = 1;
    } catch (const Error &) {
    }
  });

  int successes = 0;
  int exceed = 0;
  for (std::size_t b = 0; b < boot.size(); ++b) {
    if (!ok[b]) continue;
    ++successes;
    exceed += boot[b] >= result.statistic;
  }
  result.bootstrap_replicates = successes;
  result.bootstrap_failures = options.n_boot - successes;
  if (result.bootstrap_failures > 0) {
    result.warnings.push_back(std::to_string(result.bootstrap_failures) + " bootstrap refits failed");
  }
  if (!model.converged) result.warnings.emplace_back("model fit did not converge");
  result.p_value = static_cast<Scalar>(exceed + 1) / static_cast<Scalar>(successes + 1);
  return result;
}

/*
 * Modified psi_n(x0) = (1/n) sum_i 1(eta_i <= x0) m(eta_i), with x0 the
 * p-quantile of the linear predictors (p = 0 gives x0 = -inf, p = 1 the
 * maximum). This is the scale factor used for count models in place of the
 * squared-residual version.
 */
template <typename Scalar>
Scalar sz_psi(const FittedModel<Scalar> &model, double percentile) {
  if (!(percentile >= 0.0 && percentile <= 1.0)) throw InvalidArgument("percentile must be in [0, 1]");
  if (percentile == 0.0) return Scalar(0);
  VectorX<Scalar> sorted = model.eta;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const Scalar x0 = percentile == 1.0
                        ? sorted(sorted.size() - 1)
                        : weighted_quantile(sorted, VectorX<Scalar>::Ones(sorted.size()), percentile);
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    if (model.eta(i) <= x0) sum += model.mu(i);
  }
  return sum / static_cast<Scalar>(model.n());
}

}  // namespace ghl

#endif  // GHL_GOF_HPP_
