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

#ifndef GHL_NUMERICS_HPP_
#define GHL_NUMERICS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ghl/errors.hpp"

namespace ghl {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct PseudoinverseResult {
  MatrixX<Scalar> pinv;
  Eigen::Index rank = 0;
  // Nonincreasing.
  VectorX<Scalar> singular_values;
  Scalar tolerance_used = 0;
};

struct PseudoinverseOptions {
  // Singular values at or below rel_tol * sigma_max are treated as zero. When
  // unset the cutoff is max(size * eps * sigma_max, 1e-10).
  std::optional<double> rel_tol;
  // Eigenvalue trimming: eigenvalues below this absolute threshold (negative
  // ones included) are set to zero before inverting. Overrides rel_tol.
  std::optional<double> trim_threshold;
};

/*
 * Moore-Penrose pseudoinverse of a symmetric matrix. The input is symmetrized
 * as (A + A^T) / 2 and diagonalized; the singular values are the absolute
 * eigenvalues, so A^+ = sum over retained pairs of v v^T / lambda.
 */
template <typename Derived>
PseudoinverseResult<typename Derived::Scalar> pseudoinverse(
    const Eigen::MatrixBase<Derived> &a, const PseudoinverseOptions &options = {}) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) {
    throw InvalidArgument("pseudoinverse requires a square matrix");
  }
  const Eigen::Index size = a.rows();
  PseudoinverseResult<Scalar> result;
  result.pinv = MatrixX<Scalar>::Zero(size, size);
  result.singular_values = VectorX<Scalar>::Zero(size);
  if (size == 0) return result;

  const MatrixX<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(sym);
  const VectorX<Scalar> &lambda = eig.eigenvalues();
  const MatrixX<Scalar> &vectors = eig.eigenvectors();

  std::vector<Scalar> sv(lambda.data(), lambda.data() + size);
  for (auto &s : sv) s = std::abs(s);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  for (Eigen::Index i = 0; i < size; ++i) result.singular_values(i) = sv[i];
  const Scalar sigma_max = sv.front();

  const bool trim = options.trim_threshold.has_value();
  if (trim) {
    result.tolerance_used = static_cast<Scalar>(*options.trim_threshold);
  } else if (options.rel_tol) {
    result.tolerance_used = static_cast<Scalar>(*options.rel_tol) * sigma_max;
  } else {
    result.tolerance_used =
        std::max(static_cast<Scalar>(size) *
                     std::numeric_limits<Scalar>::epsilon() * sigma_max,
                 Scalar(1e-10));
  }

  for (Eigen::Index i = 0; i < size; ++i) {
    const Scalar l = lambda(i);
    const bool keep = trim ? (l >= result.tolerance_used && l != 0)
                           : std::abs(l) > result.tolerance_used;
    if (!keep) continue;
    ++result.rank;
    result.pinv.noalias() += (vectors.col(i) / l) * vectors.col(i).transpose();
  }
  return result;
}

namespace details {

// Series for the regularized lower incomplete gamma P(a, x), x < a + 1.
template <typename Scalar>
Scalar gamma_p_series(Scalar a, Scalar x) {
  Scalar term = Scalar(1) / a;
  Scalar sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * std::numeric_limits<Scalar>::epsilon()) {
      break;
    }
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x), x >= a + 1.
template <typename Scalar>
Scalar gamma_q_continued_fraction(Scalar a, Scalar x) {
  const Scalar tiny = std::numeric_limits<Scalar>::min() / std::numeric_limits<Scalar>::epsilon();
  Scalar b = x + Scalar(1) - a;
  Scalar c = Scalar(1) / tiny;
  Scalar d = Scalar(1) / b;
  Scalar h = d;
  for (int i = 1; i < 10000; ++i) {
    const Scalar an = -i * (i - a);
    b += Scalar(2);
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = Scalar(1) / d;
    const Scalar delta = d * c;
    h *= delta;
    if (std::abs(delta - Scalar(1)) < std::numeric_limits<Scalar>::epsilon()) {
      break;
    }
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace details

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
template <typename Scalar>
Scalar regularized_gamma_q(Scalar a, Scalar x) {
  if (!(a > 0)) throw InvalidArgument("incomplete gamma requires a > 0");
  if (x <= 0) return Scalar(1);
  if (std::isinf(x)) return Scalar(0);
  if (x < a + Scalar(1)) return Scalar(1) - details::gamma_p_series(a, x);
  return details::gamma_q_continued_fraction(a, x);
}

template <typename Scalar>
Scalar regularized_gamma_p(Scalar a, Scalar x) {
  if (!(a > 0)) throw InvalidArgument("incomplete gamma requires a > 0");
  if (x <= 0) return Scalar(0);
  if (std::isinf(x)) return Scalar(1);
  if (x < a + Scalar(1)) return details::gamma_p_series(a, x);
  return Scalar(1) - details::gamma_q_continued_fraction(a, x);
}

// P(chi^2_df > x).
template <typename Scalar>
Scalar chi_sq_sf(Scalar x, int df) {
  if (df < 1) throw InvalidArgument("chi-squared df must be at least 1");
  if (std::isnan(x) || x < 0) throw InvalidArgument("chi-squared argument must be >= 0");
  return regularized_gamma_q(Scalar(df) / 2, x / 2);
}

template <typename Scalar>
Scalar chi_sq_cdf(Scalar x, int df) {
  if (df < 1) throw InvalidArgument("chi-squared df must be at least 1");
  if (std::isnan(x) || x < 0) throw InvalidArgument("chi-squared argument must be >= 0");
  return regularized_gamma_p(Scalar(df) / 2, x / 2);
}

// Standard normal quantile: rational initial guess refined by Newton steps
// on erfc.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal quantile needs 0 < p < 1");
  const double t = std::sqrt(-2.0 * std::log(p < 0.5 ? p : 1.0 - p));
  double z = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                     (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
  if (p < 0.5) z = -z;
  for (int i = 0; i < 8; ++i) {
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    const double step = (cdf - p) / pdf;
    z -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

/*
 * Inverse-CDF weighted quantile: the smallest value v such that the summed
 * weight of values <= v is at least p times the total weight. Values must be
 * sorted ascending; weights must be positive.
 */
template <typename DerivedV, typename DerivedW>
typename DerivedV::Scalar weighted_quantile(const Eigen::MatrixBase<DerivedV> &values,
                                            const Eigen::MatrixBase<DerivedW> &weights,
                                            double p) {
  using Scalar = typename DerivedV::Scalar;
  const Eigen::Index n = values.size();
  if (n == 0) throw InvalidArgument("weighted quantile of empty input");
  if (weights.size() != n) throw InvalidArgument("values and weights differ in length");
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("quantile fraction must lie in (0, 1)");
  Scalar total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(weights(i) > 0)) throw InvalidArgument("weights must be positive");
    total += weights(i);
  }
  const Scalar target = static_cast<Scalar>(p) * total;
  const Scalar slack = Scalar(1e-12) * total;
  Scalar cum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cum += weights(i);
    // Ties share one cumulative weight: only the last of a run can qualify.
    if (i + 1 < n && values(i + 1) == values(i)) continue;
    if (cum >= target - slack) return values(i);
  }
  return values(n - 1);
}

}  // namespace ghl

#endif  // GHL_NUMERICS_HPP_
