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

// Independent reference computations used only by the tests. Nothing here
// calls into the optimized paths it is used to check.
#ifndef GHL_TESTS_ORACLE_HPP_
#define GHL_TESTS_ORACLE_HPP_

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "ghl/families.hpp"
#include "ghl/glm.hpp"
#include "ghl/grouping.hpp"

namespace ghl::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Adaptive Simpson integration.
inline double simpson_step(const std::function<double(double)> &f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)> &f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 60);
}

// P(chi^2_df > x) as 1 - int_0^x density, integrated in s = sqrt(t) so the
// integrand 2 s f(s^2) is smooth at the origin for every df >= 1.
inline double chi_sq_sf_quadrature(double x, int df) {
  if (x <= 0) return 1.0;
  const double k = df / 2.0;
  const double log_norm = -k * std::log(2.0) - std::lgamma(k);
  auto integrand = [&](double s) {
    if (s == 0.0) return df == 1 ? 2.0 * std::exp(log_norm) : 0.0;
    return 2.0 * std::exp(log_norm + (df - 1) * std::log(s) - 0.5 * s * s);
  };
  const double upper = std::sqrt(x);
  // Split so the peak near sqrt(df - 1) is resolved.
  double cdf = 0;
  const int pieces = 16;
  for (int p = 0; p < pieces; ++p) {
    cdf += integrate(integrand, upper * p / pieces, upper * (p + 1) / pieces, 1e-15);
  }
  return 1.0 - cdf;
}

inline double log_likelihood(const Dataset<double> &data, const VectorXd &beta,
                             const FamilySpec &family, Link link) {
  double total = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double m = inverse_link(link, data.design.row(i).dot(beta));
    total += log_density_kernel(family, data.response(i), m);
  }
  return total;
}

inline VectorXd finite_difference_gradient(const Dataset<double> &data, const VectorXd &beta,
                                           const FamilySpec &family, Link link, double h = 1e-5) {
  VectorXd grad(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    VectorXd up = beta, down = beta;
    up(j) += h;
    down(j) -= h;
    grad(j) = (log_likelihood(data, up, family, link) - log_likelihood(data, down, family, link)) /
              (2.0 * h);
  }
  return grad;
}

struct SigmaForms {
  MatrixXd first;   // G (V - V^1/2 W^1/2 X (X'WX)^-1 X' W^1/2 V^1/2) G' / n
  MatrixXd second;  // G V^1/2 (I - W^1/2 X (X'WX)^-1 X' W^1/2) V^1/2 G' / n
  MatrixXd third;   // G V^1/2 (I - H) V^1/2 G' / n with H from hat_matrix()
};

// Literal transcriptions with explicit n x n matrices.
inline SigmaForms sigma_forms(const FittedModel<double> &model, const Dataset<double> &data,
                              const GroupSpec<double> &spec) {
  const Eigen::Index n = data.n();
  VectorXd sd(n), w_half(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sd(i) = std::sqrt(working_variance(model.family, model.link, model.mu(i)));
    w_half(i) = inverse_link_deriv(model.link, model.eta(i)) / sd(i);
  }
  const MatrixXd g = spec.indicator();
  const MatrixXd v = sd.array().square().matrix().asDiagonal();
  const MatrixXd v_half = sd.asDiagonal();
  const MatrixXd wh = w_half.asDiagonal();
  const MatrixXd &x = data.design;
  const MatrixXd info_inv = (x.transpose() * wh * wh * x).inverse();
  const MatrixXd identity = MatrixXd::Identity(n, n);

  SigmaForms forms;
  forms.first = g * (v - v_half * wh * x * info_inv * x.transpose() * wh * v_half) * g.transpose() / n;
  forms.second = g * v_half * (identity - wh * x * info_inv * x.transpose() * wh) * v_half * g.transpose() / n;
  forms.third = g * v_half * (identity - hat_matrix(data, model)) * v_half * g.transpose() / n;
  return forms;
}

// Pseudoinverse through a full SVD, with the same rank cutoff rule.
inline MatrixXd svd_pseudoinverse(const MatrixXd &a, Eigen::Index *rank = nullptr) {
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd &s = svd.singularValues();
  const double tol = std::max(a.rows() * std::numeric_limits<double>::epsilon() * s(0), 1e-10);
  VectorXd inv = VectorXd::Zero(s.size());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) {
      inv(i) = 1.0 / s(i);
      ++r;
    }
  }
  if (rank) *rank = r;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// GHL statistic from the literal first form of Sigma_n and an SVD inverse.
inline double ghl_brute_force(const FittedModel<double> &model, const Dataset<double> &data,
                              const GroupSpec<double> &spec, Eigen::Index *rank = nullptr) {
  const MatrixXd sigma = sigma_forms(model, data, spec).first;
  VectorXd s = VectorXd::Zero(spec.groups());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    s(spec.membership[i]) += data.response(i) - model.mu(i);
  }
  s /= std::sqrt(static_cast<double>(data.n()));
  return s.dot(svd_pseudoinverse(sigma, rank) * s);
}

// Su-Wei supremum over every corner (x_{i,1}, x_{j,2}) of a two-covariate grid.
inline double sw_exhaustive_corners(const MatrixXd &covariates, const VectorXd &resid) {
  const Eigen::Index n = covariates.rows();
  double best = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double u1 = covariates(a, 0), u2 = covariates(b, 1);
      double sum = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (covariates(i, 0) <= u1 && covariates(i, 1) <= u2) sum += resid(i);
      }
      best = std::max(best, std::abs(sum));
    }
  }
  return best / std::sqrt(static_cast<double>(n));
}

// Random small GLM fixture with an intercept and d - 1 standard-normal
// covariates, responses drawn from the model at a moderate true beta.
inline Dataset<double> random_fixture(std::mt19937_64 &rng, Eigen::Index n, Eigen::Index d,
                                      Family family) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset<double> data{MatrixXd(n, d), VectorXd(n)};
  VectorXd beta(d);
  beta(0) = family == Family::poisson ? 1.2 : 0.2;
  for (Eigen::Index j = 1; j < d; ++j) beta(j) = 0.4 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    data.design(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < d; ++j) data.design(i, j) = normal(rng);
    const double eta = data.design.row(i).dot(beta);
    if (family == Family::poisson) {
      data.response(i) = static_cast<double>(std::poisson_distribution<int>(std::exp(eta))(rng));
    } else {
      const double p = 1.0 / (1.0 + std::exp(-eta));
      data.response(i) = std::uniform_real_distribution<double>(0, 1)(rng) < p ? 1.0 : 0.0;
    }
  }
  return data;
}

}  // namespace ghl::oracle

#endif  // GHL_TESTS_ORACLE_HPP_
