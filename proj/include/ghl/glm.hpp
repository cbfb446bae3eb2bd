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

#ifndef GHL_GLM_HPP_
#define GHL_GLM_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghl/errors.hpp"
#include "ghl/families.hpp"
#include "ghl/numerics.hpp"

namespace ghl {

// Design matrix (intercept column included by the caller) and response.
template <typename Scalar>
struct Dataset {
  MatrixX<Scalar> design;
  VectorX<Scalar> response;

  Eigen::Index n() const { return design.rows(); }
  Eigen::Index d() const { return design.cols(); }
};

template <typename Scalar>
void validate_dataset(const Dataset<Scalar> &data, const FamilySpec &family) {
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  if (d < 1) throw InvalidArgument("design must have at least one column");
  if (n <= d) throw InvalidArgument("need more observations than parameters (n > d)");
  if (data.response.size() != n) throw InvalidArgument("response length differs from design rows");
  if (!data.design.allFinite() || !data.response.allFinite()) {
    throw InvalidArgument("dataset contains non-finite entries");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar y = data.response(i);
    switch (family.kind) {
      case Family::bernoulli:
        if (y != 0 && y != 1) throw InvalidArgument("bernoulli response must be 0 or 1");
        break;
      case Family::poisson:
      case Family::negative_binomial:
        if (y < 0 || std::floor(y) != y) {
          throw InvalidArgument("count response must be a nonnegative integer");
        }
        break;
      case Family::gamma:
      case Family::inverse_gaussian:
        if (!(y > 0)) throw InvalidArgument("gamma/inverse gaussian response must be positive");
        break;
      case Family::normal:
        break;
    }
  }
}

template <typename Scalar>
struct FitOptions {
  int max_iter = 100;
  Scalar tol = Scalar(1e-8);
  int max_halvings = 20;
  // Reciprocal condition estimate of X^T W X below which it counts as singular.
  Scalar singular_rcond = Scalar(1e-12);
  std::optional<VectorX<Scalar>> initial_beta;
  // Starting means (e.g. fitted values of a previous model); ignored when
  // initial_beta is given.
  std::optional<VectorX<Scalar>> initial_mu;
  bool allow_invalid_pair = false;
};

template <typename Scalar>
struct FittedModel {
  VectorX<Scalar> beta;
  VectorX<Scalar> eta;
  VectorX<Scalar> mu;
  VectorX<Scalar> response;
  FamilySpec family;
  Link link = Link::log;
  bool converged = false;
  int iterations = 0;
  Scalar score_norm = 0;
  Scalar log_likelihood = 0;
  // Objective after each accepted iterate, starting with the first.
  std::vector<Scalar> log_likelihood_trace;

  Eigen::Index n() const { return eta.size(); }
  Eigen::Index d() const { return beta.size(); }
};

namespace details {

template <typename Scalar>
bool means_in_domain(const FamilySpec &family, const VectorX<Scalar> &mu) {
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (!in_mean_domain(family.kind, static_cast<double>(mu(i)))) return false;
  }
  return true;
}

template <typename Scalar>
VectorX<Scalar> apply_inverse_link(Link link, const VectorX<Scalar> &eta) {
  return eta.unaryExpr([link](Scalar u) { return inverse_link(link, u); });
}

template <typename Scalar>
VectorX<Scalar> apply_inverse_link_deriv(Link link, const VectorX<Scalar> &eta) {
  return eta.unaryExpr([link](Scalar u) { return inverse_link_deriv(link, u); });
}

template <typename Scalar>
VectorX<Scalar> working_variances(const FamilySpec &family, Link link,
                                  const VectorX<Scalar> &mu) {
  return mu.unaryExpr([&](Scalar m) { return working_variance(family, link, m); });
}

template <typename Scalar>
Scalar sum_log_density(const FamilySpec &family, const VectorX<Scalar> &y,
                       const VectorX<Scalar> &mu) {
  Scalar total = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += log_density_kernel(family, y(i), mu(i));
  return total;
}

// IRLS weights m'(eta)^2 / v(mu).
template <typename Scalar>
VectorX<Scalar> irls_weights(const FamilySpec &family, Link link,
                             const VectorX<Scalar> &eta, const VectorX<Scalar> &mu) {
  const VectorX<Scalar> deriv = apply_inverse_link_deriv(link, eta);
  const VectorX<Scalar> var = working_variances(family, link, mu);
  return deriv.array().square() / var.array();
}

template <typename Scalar>
MatrixX<Scalar> weighted_gram(const MatrixX<Scalar> &x, const VectorX<Scalar> &w) {
  MatrixX<Scalar> gram = MatrixX<Scalar>::Zero(x.cols(), x.cols());
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(
      (x.array().colwise() * w.array().sqrt()).matrix().transpose());
  return gram.template selfadjointView<Eigen::Lower>();
}

template <typename Scalar>
Eigen::LDLT<MatrixX<Scalar>> checked_factor(const MatrixX<Scalar> &info, Scalar min_rcond) {
  Eigen::LDLT<MatrixX<Scalar>> ldlt(info);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() >= min_rcond)) {
    throw SingularInformation("X^T W X is numerically singular");
  }
  return ldlt;
}

template <typename Scalar>
Scalar starting_mean(const FamilySpec &family, Scalar y) {
  switch (family.kind) {
    case Family::bernoulli:
      return (y + Scalar(0.5)) / Scalar(2);
    case Family::poisson:
    case Family::negative_binomial:
    case Family::gamma:
    case Family::inverse_gaussian:
      return std::max(y, Scalar(0.1));
    case Family::normal:
      return y;
  }
  return y;
}

}  // namespace details

template <typename Scalar>
Scalar log_likelihood(const Dataset<Scalar> &data, const VectorX<Scalar> &beta,
                      const FamilySpec &family, Link link) {
  const VectorX<Scalar> mu = details::apply_inverse_link(link, VectorX<Scalar>(data.design * beta));
  if (!details::means_in_domain(family, mu)) throw DomainError("mean outside the family's mean domain");
  return details::sum_log_density(family, data.response, mu);
}

// sum_i x_i m'(eta_i) (y_i - mu_i) / v(mu_i)
template <typename Scalar>
VectorX<Scalar> score(const Dataset<Scalar> &data, const VectorX<Scalar> &beta,
                      const FamilySpec &family, Link link) {
  const VectorX<Scalar> eta = data.design * beta;
  const VectorX<Scalar> mu = details::apply_inverse_link(link, eta);
  if (!details::means_in_domain(family, mu)) throw DomainError("mean outside the family's mean domain");
  const VectorX<Scalar> deriv = details::apply_inverse_link_deriv(link, eta);
  const VectorX<Scalar> var = details::working_variances(family, link, mu);
  const VectorX<Scalar> r =
      (deriv.array() * (data.response - mu).array() / var.array()).matrix();
  return data.design.transpose() * r;
}

// Empirical Fisher information (1/n) X^T W X, W = diag(m'(eta)^2 / v(mu)).
template <typename Scalar>
MatrixX<Scalar> fisher_information(const Dataset<Scalar> &data, const VectorX<Scalar> &beta,
                                   const FamilySpec &family, Link link) {
  const VectorX<Scalar> eta = data.design * beta;
  const VectorX<Scalar> mu = details::apply_inverse_link(link, eta);
  if (!details::means_in_domain(family, mu)) throw DomainError("mean outside the family's mean domain");
  const VectorX<Scalar> w = details::irls_weights(family, link, eta, mu);
  return details::weighted_gram(data.design, w) / static_cast<Scalar>(data.n());
}

/*
 * Maximum-likelihood fit by Fisher scoring (IRLS).
 *
 * The first iterate is the weighted least-squares solve on the working
 * response built from starting means (or initial_beta when given). Later steps
 * are beta + (X^T W X)^{-1} score, halved up to max_halvings times whenever
 * the log-likelihood drops or a mean leaves the family's domain.
 * Convergence is declared when the sup-norm of the score is <= tol.
 * Non-convergence is reported through `converged`, not thrown.
 */
template <typename Scalar>
FittedModel<Scalar> fit_irls(const Dataset<Scalar> &data, const FamilySpec &family, Link link,
                             const FitOptions<Scalar> &options = {}) {
  if (!options.allow_invalid_pair && !validate_pair(family, link)) {
    throw InvalidArgument(std::string("family/link pair ") + std::string(to_string(family.kind)) +
                          "/" + std::string(to_string(link)) + " is not supported");
  }
  validate_dataset(data, family);
  const MatrixX<Scalar> &x = data.design;
  const VectorX<Scalar> &y = data.response;
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();

  FittedModel<Scalar> model;
  model.family = family;
  model.link = link;
  model.response = y;

  VectorX<Scalar> beta;
  if (options.initial_beta) {
    if (options.initial_beta->size() != d) throw InvalidArgument("initial_beta has wrong length");
    beta = *options.initial_beta;
  } else {
    VectorX<Scalar> mu0(n);
    if (options.initial_mu) {
      if (options.initial_mu->size() != n) throw InvalidArgument("initial_mu has wrong length");
      mu0 = *options.initial_mu;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) mu0(i) = details::starting_mean(family, y(i));
    }
    if (!details::means_in_domain(family, mu0)) throw DomainError("starting means outside the mean domain");
    const VectorX<Scalar> eta0 = mu0.unaryExpr([link](Scalar m) { return link_function(link, m); });
    const VectorX<Scalar> deriv0 = details::apply_inverse_link_deriv(link, eta0);
    const VectorX<Scalar> w0 = details::irls_weights(family, link, eta0, mu0);
    const VectorX<Scalar> z = eta0.array() + (y - mu0).array() / deriv0.array();
    const auto ldlt = details::checked_factor(details::weighted_gram(x, w0), options.singular_rcond);
    beta = ldlt.solve(x.transpose() * (w0.array() * z.array()).matrix());
  }

  VectorX<Scalar> eta = x * beta;
  VectorX<Scalar> mu = details::apply_inverse_link(link, eta);
  if (!details::means_in_domain(family, mu)) throw DomainEscape("initial iterate leaves the mean domain");
  Scalar ll = details::sum_log_density(family, y, mu);
  model.log_likelihood_trace.push_back(ll);

  int iter = 0;
  for (;; ++iter) {
    const VectorX<Scalar> deriv = details::apply_inverse_link_deriv(link, eta);
    const VectorX<Scalar> var = details::working_variances(family, link, mu);
    const VectorX<Scalar> r = deriv.array() * (y - mu).array() / var.array();
    const VectorX<Scalar> grad = x.transpose() * r;
    model.score_norm = grad.cwiseAbs().maxCoeff();
    if (model.score_norm <= options.tol) {
      model.converged = true;
      break;
    }
    if (iter >= options.max_iter) break;

    const VectorX<Scalar> w = deriv.array().square() / var.array();
    const auto ldlt = details::checked_factor(details::weighted_gram(x, w), options.singular_rcond);
    const VectorX<Scalar> step = ldlt.solve(grad);

    const Scalar slack = Scalar(1e-12) * (Scalar(1) + std::abs(ll));
    bool accepted = false;
    bool any_in_domain = false;
    Scalar t = 1;
    for (int h = 0; h <= options.max_halvings; ++h, t /= 2) {
      VectorX<Scalar> cand = beta + t * step;
      VectorX<Scalar> cand_eta = x * cand;
      VectorX<Scalar> cand_mu = details::apply_inverse_link(link, cand_eta);
      if (!details::means_in_domain(family, cand_mu)) continue;
      any_in_domain = true;
      const Scalar cand_ll = details::sum_log_density(family, y, cand_mu);
      if (!std::isfinite(cand_ll) || cand_ll < ll - slack) continue;
      beta = std::move(cand);
      eta = std::move(cand_eta);
      mu = std::move(cand_mu);
      ll = cand_ll;
      accepted = true;
      break;
    }
    if (!accepted) {
      if (!any_in_domain) throw DomainEscape("step-halving failed to stay in the mean domain");
      // No ascent possible at working precision; report what we have.
      ++iter;
      break;
    }
    model.log_likelihood_trace.push_back(ll);
  }

  model.iterations = iter;
  model.beta = std::move(beta);
  model.eta = std::move(eta);
  model.mu = std::move(mu);
  model.log_likelihood = ll;
  return model;
}

/*
 * Generalized hat matrix W^{1/2} X (X^T W X)^{-1} X^T W^{1/2}, with
 * W^{1/2} = diag(m'(eta) / sigma(x)) carrying the sign of m'.
 * Materializes an n x n matrix; meant for diagnostics and small n.
 */
template <typename Scalar>
MatrixX<Scalar> hat_matrix(const Dataset<Scalar> &data, const FittedModel<Scalar> &model,
                           Scalar singular_rcond = Scalar(1e-12)) {
  const VectorX<Scalar> deriv = details::apply_inverse_link_deriv(model.link, model.eta);
  const VectorX<Scalar> sd = details::working_variances(model.family, model.link, model.mu).array().sqrt();
  const VectorX<Scalar> w_half = deriv.array() / sd.array();
  const MatrixX<Scalar> wx = data.design.array().colwise() * w_half.array();
  const MatrixX<Scalar> info = wx.transpose() * wx;
  const auto ldlt = details::checked_factor(info, singular_rcond);
  return wx * ldlt.solve(wx.transpose());
}

}  // namespace ghl

#endif  // GHL_GLM_HPP_
