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

#ifndef GHL_GROUPING_HPP_
#define GHL_GROUPING_HPP_

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ghl/errors.hpp"
#include "ghl/glm.hpp"
#include "ghl/numerics.hpp"

namespace ghl {

enum class GroupingMethod { variance_weighted, equal_count, fixed };

inline std::string_view to_string(GroupingMethod m) {
  switch (m) {
    case GroupingMethod::variance_weighted:
      return "variance_weighted";
    case GroupingMethod::equal_count:
      return "equal_count";
    case GroupingMethod::fixed:
      return "fixed";
  }
  return "";
}

/*
 * A partition of the observations into G intervals of the linear predictor,
 * (k_{g-1}, k_g] with k_0 = -inf and k_G = +inf.
 */
template <typename Scalar>
struct GroupSpec {
  VectorX<Scalar> endpoints;
  // 0-based group of each observation.
  std::vector<Eigen::Index> membership;
  Eigen::VectorXi counts;
  GroupingMethod method = GroupingMethod::variance_weighted;

  Eigen::Index groups() const { return endpoints.size() - 1; }
  Eigen::Index n() const { return static_cast<Eigen::Index>(membership.size()); }

  // The G x n 0/1 matrix G*_n.
  MatrixX<Scalar> indicator() const {
    MatrixX<Scalar> ind = MatrixX<Scalar>::Zero(groups(), n());
    for (Eigen::Index i = 0; i < n(); ++i) ind(membership[i], i) = Scalar(1);
    return ind;
  }
};

template <typename Scalar>
struct GroupSummary {
  VectorX<Scalar> observed;     // O_g
  VectorX<Scalar> expected;     // E_g
  Eigen::VectorXi counts;       // n_g
  VectorX<Scalar> mean_fitted;  // E_g / n_g
  VectorX<Scalar> variance_sum; // V_g
};

// Group index g (0-based) with k_{g} < eta <= k_{g+1}.
template <typename Scalar>
std::vector<Eigen::Index> assign_groups(const VectorX<Scalar> &eta,
                                        const VectorX<Scalar> &endpoints) {
  const Eigen::Index groups = endpoints.size() - 1;
  if (groups < 1) throw InvalidArgument("need at least two endpoints");
  for (Eigen::Index g = 0; g < groups; ++g) {
    if (!(endpoints(g) < endpoints(g + 1))) {
      throw InvalidArgument("endpoints must be strictly increasing");
    }
  }
  const Scalar *first = endpoints.data() + 1;
  const Scalar *last = endpoints.data() + groups;  // interior endpoints only
  std::vector<Eigen::Index> membership(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    membership[i] = std::lower_bound(first, last, eta(i)) - first;
  }
  return membership;
}

template <typename Scalar>
MatrixX<Scalar> group_indicators(const VectorX<Scalar> &eta, const VectorX<Scalar> &endpoints) {
  GroupSpec<Scalar> spec;
  spec.endpoints = endpoints;
  spec.membership = assign_groups(eta, endpoints);
  return spec.indicator();
}

// Builds a GroupSpec and rejects partitions with an empty group.
template <typename Scalar>
GroupSpec<Scalar> make_group_spec(const VectorX<Scalar> &eta, VectorX<Scalar> endpoints,
                                  GroupingMethod method) {
  GroupSpec<Scalar> spec;
  spec.membership = assign_groups(eta, endpoints);
  spec.endpoints = std::move(endpoints);
  spec.method = method;
  spec.counts = Eigen::VectorXi::Zero(spec.groups());
  for (auto g : spec.membership) ++spec.counts(g);
  for (Eigen::Index g = 0; g < spec.groups(); ++g) {
    if (spec.counts(g) == 0) {
      throw InvalidArgument("grouping leaves group " + std::to_string(g + 1) + " empty");
    }
  }
  return spec;
}

namespace details {

template <typename Scalar>
std::vector<Eigen::Index> sort_order(const VectorX<Scalar> &eta) {
  std::vector<Eigen::Index> order(eta.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return eta(a) < eta(b); });
  return order;
}

}  // namespace details

/*
 * How each sequential endpoint is placed on the observed eta values.
 *
 * inverse_cdf: the smallest eta whose cumulative weight reaches the target
 * fraction. The top group then never exceeds its share, so every step
 * leaves a shortfall of up to one weight that is pushed into the groups
 * below; the spread of V_g can reach w_max (1 + H_{G-1}).
 *
 * nearest (default): the eta whose cumulative weight is closest to the
 * target, ties going to the inverse_cdf choice. Shortfalls and overshoots
 * then largely cancel.
 */
enum class QuantileRule { nearest, inverse_cdf };

namespace details {

// Among tie-run ends of sorted[0, end), the eta whose cumulative weight is
// closest to p * total; `upper` is the inverse-CDF point, which wins ties.
template <typename Scalar>
Scalar nearest_weight_point(const VectorX<Scalar> &sorted, const VectorX<Scalar> &w, Eigen::Index end,
                            double p, Scalar upper) {
  const Scalar total = w.head(end).sum();
  const Scalar target = static_cast<Scalar>(p) * total;
  Scalar cum = 0;
  Scalar below_cum = 0;
  std::optional<Scalar> below;
  Scalar upper_cum = total;
  for (Eigen::Index i = 0; i < end; ++i) {
    cum += w(i);
    if (i + 1 < end && sorted(i + 1) == sorted(i)) continue;
    if (sorted(i) < upper) {
      below = sorted(i);
      below_cum = cum;
    } else if (sorted(i) == upper) {
      upper_cum = cum;
      break;
    }
  }
  if (below && target - below_cum < upper_cum - target) return *below;
  return upper;
}

}  // namespace details

/*
 * Sequential weighted-quantile endpoints. With m groups still to form from
 * the lowest `end` sorted observations, the next endpoint is the weighted
 * (m-1)/m quantile of those observations; everything above it becomes the
 * top remaining group and is set aside. Endpoints always sit on observed
 * eta values, so tied values are never split.
 *
 * When the quantile lands on the largest remaining value (one very heavy
 * observation at the top), the endpoint drops to the next distinct value so
 * the heavy observation forms its own group. When too few distinct values
 * would remain below the endpoint, it is raised just enough to keep every
 * lower group nonempty.
 */
template <typename Scalar>
VectorX<Scalar> sequential_weighted_endpoints(const VectorX<Scalar> &eta,
                                              const VectorX<Scalar> &weights,
                                              Eigen::Index groups,
                                              QuantileRule rule = QuantileRule::nearest) {
  if (groups < 2) throw InvalidArgument("need G >= 2 groups");
  if (eta.size() != weights.size()) throw InvalidArgument("eta and weights differ in length");
  if (eta.size() < groups) throw InvalidArgument("need at least G observations");

  const auto order = details::sort_order(eta);
  const Eigen::Index n = eta.size();
  VectorX<Scalar> sorted_eta(n), sorted_w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sorted_eta(i) = eta(order[i]);
    sorted_w(i) = weights(order[i]);
  }
  const Scalar *begin = sorted_eta.data();

  VectorX<Scalar> endpoints(groups + 1);
  endpoints(0) = -std::numeric_limits<Scalar>::infinity();
  endpoints(groups) = std::numeric_limits<Scalar>::infinity();

  Eigen::Index end = n;
  for (Eigen::Index m = groups; m >= 2; --m) {
    // Distinct values among the remaining observations.
    std::vector<Scalar> distinct;
    for (Eigen::Index i = 0; i < end; ++i) {
      if (distinct.empty() || sorted_eta(i) != distinct.back()) distinct.push_back(sorted_eta(i));
    }
    if (static_cast<Eigen::Index>(distinct.size()) < m) {
      throw InfeasibleGrouping("tied linear predictors leave fewer distinct values than groups");
    }
    const double p = static_cast<double>(m - 1) / static_cast<double>(m);
    Scalar k = weighted_quantile(sorted_eta.head(end), sorted_w.head(end), p);
    if (rule == QuantileRule::nearest) k = details::nearest_weight_point(sorted_eta, sorted_w, end, p, k);
    if (k >= distinct.back()) k = distinct[distinct.size() - 2];
    const auto below = static_cast<Eigen::Index>(
        std::upper_bound(distinct.begin(), distinct.end(), k) - distinct.begin());
    if (below < m - 1) k = distinct[m - 2];
    endpoints(m - 1) = k;
    end = std::upper_bound(begin, begin + end, k) - begin;
  }
  return endpoints;
}

// Variance-weighted grouping: weights v(mu_i), so that the summed fitted
// variance is roughly equal across groups.
template <typename Scalar>
GroupSpec<Scalar> variance_weighted_endpoints(const FittedModel<Scalar> &model,
                                              Eigen::Index groups,
                                              QuantileRule rule = QuantileRule::nearest) {
  const VectorX<Scalar> w = details::working_variances(model.family, model.link, model.mu);
  VectorX<Scalar> endpoints = sequential_weighted_endpoints(model.eta, w, groups, rule);
  try {
    return make_group_spec(model.eta, std::move(endpoints), GroupingMethod::variance_weighted);
  } catch (const InvalidArgument &e) {
    throw InfeasibleGrouping(e.what());
  }
}

// Classic deciles-of-risk grouping: endpoints at the g/G quantiles of eta.
template <typename Scalar>
GroupSpec<Scalar> equal_count_endpoints(const FittedModel<Scalar> &model, Eigen::Index groups) {
  if (groups < 2) throw InvalidArgument("need G >= 2 groups");
  if (model.n() < groups) throw InvalidArgument("need at least G observations");
  const auto order = details::sort_order(model.eta);
  VectorX<Scalar> sorted(model.n());
  for (Eigen::Index i = 0; i < model.n(); ++i) sorted(i) = model.eta(order[i]);
  const VectorX<Scalar> ones = VectorX<Scalar>::Ones(model.n());
  VectorX<Scalar> endpoints(groups + 1);
  endpoints(0) = -std::numeric_limits<Scalar>::infinity();
  endpoints(groups) = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index g = 1; g < groups; ++g) {
    endpoints(g) = weighted_quantile(sorted, ones, static_cast<double>(g) / groups);
    if (!(endpoints(g) > endpoints(g - 1)) || !(endpoints(g) < sorted(model.n() - 1))) {
      throw InfeasibleGrouping("tied linear predictors make an equal-count group empty");
    }
  }
  try {
    return make_group_spec(model.eta, std::move(endpoints), GroupingMethod::equal_count);
  } catch (const InvalidArgument &e) {
    throw InfeasibleGrouping(e.what());
  }
}

// User-supplied interior endpoints k_1 < ... < k_{G-1}.
template <typename Scalar>
GroupSpec<Scalar> fixed_endpoints(const FittedModel<Scalar> &model,
                                  const std::vector<Scalar> &interior) {
  VectorX<Scalar> endpoints(static_cast<Eigen::Index>(interior.size()) + 2);
  endpoints(0) = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < interior.size(); ++i) endpoints(i + 1) = interior[i];
  endpoints(endpoints.size() - 1) = std::numeric_limits<Scalar>::infinity();
  try {
    return make_group_spec(model.eta, std::move(endpoints), GroupingMethod::fixed);
  } catch (const InvalidArgument &e) {
    throw InfeasibleGrouping(e.what());
  }
}

template <typename Scalar>
GroupSummary<Scalar> group_summaries(const FittedModel<Scalar> &model,
                                     const GroupSpec<Scalar> &spec) {
  if (spec.n() != model.n()) throw InvalidArgument("group spec built for a different sample");
  const Eigen::Index groups = spec.groups();
  GroupSummary<Scalar> s;
  s.observed = VectorX<Scalar>::Zero(groups);
  s.expected = VectorX<Scalar>::Zero(groups);
  s.variance_sum = VectorX<Scalar>::Zero(groups);
  s.counts = Eigen::VectorXi::Zero(groups);
  for (Eigen::Index i = 0; i < model.n(); ++i) {
    const auto g = spec.membership[i];
    s.observed(g) += model.response(i);
    s.expected(g) += model.mu(i);
    s.variance_sum(g) += working_variance(model.family, model.link, model.mu(i));
    ++s.counts(g);
  }
  s.mean_fitted = s.expected.array() / s.counts.template cast<Scalar>().array();
  return s;
}

}  // namespace ghl

#endif  // GHL_GROUPING_HPP_
