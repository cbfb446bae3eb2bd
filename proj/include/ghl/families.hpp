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

#ifndef GHL_FAMILIES_HPP_
#define GHL_FAMILIES_HPP_

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "ghl/errors.hpp"

namespace ghl {

/*
 * Exponential-dispersion families with a known dispersion parameter, and the
 * link functions that may be paired with them.
 *
 * The dispersion is interpreted per family:
 *   normal             sigma^2         v(m) = sigma^2
 *   bernoulli          unused          v(m) = m (1 - m)
 *   poisson            unused          v(m) = m
 *   gamma              shape k         v(m) = m^2 / k
 *   inverse_gaussian   lambda          v(m) = m^3 / lambda
 *   negative_binomial  size k          v(m) = m + m^2 / k
 */
enum class Family {
  normal,
  bernoulli,
  poisson,
  gamma,
  inverse_gaussian,
  negative_binomial
};

enum class Link { identity, log, logit, probit, cauchit, cloglog, sqrt };

struct FamilySpec {
  Family kind = Family::poisson;
  double dispersion = 1.0;

  FamilySpec() = default;
  explicit FamilySpec(Family k, double disp = 1.0) : kind(k), dispersion(disp) {
    if (!(disp > 0.0) || !std::isfinite(disp)) {
      throw InvalidArgument("dispersion must be positive and finite");
    }
  }

  friend bool operator==(const FamilySpec &, const FamilySpec &) = default;
};

// Floor applied to sqrt-link fitted means before the variance is evaluated.
inline constexpr double kSqrtLinkMeanFloor = 1e-10;

namespace details {

template <typename Scalar>
inline Scalar clamp_unit_open(Scalar m) {
  // Largest representable value below one, and the smallest normal number.
  const Scalar hi = Scalar(1) - std::numeric_limits<Scalar>::epsilon() / 2;
  const Scalar lo = std::numeric_limits<Scalar>::min();
  return m < lo ? lo : (m > hi ? hi : m);
}

template <typename Scalar>
inline Scalar standard_normal_cdf(Scalar u) {
  return Scalar(0.5) * std::erfc(-u / std::numbers::sqrt2_v<Scalar>);
}

template <typename Scalar>
inline Scalar standard_normal_pdf(Scalar u) {
  return std::exp(Scalar(-0.5) * u * u) /
         std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

}  // namespace details

template <typename Scalar>
inline Scalar inverse_link(Link link, Scalar u) {
  using details::clamp_unit_open;
  switch (link) {
    case Link::identity:
      return u;
    case Link::log:
      return std::exp(u);
    case Link::logit: {
      if (u >= 0) {
        return clamp_unit_open(Scalar(1) / (Scalar(1) + std::exp(-u)));
      }
      const Scalar e = std::exp(u);
      return clamp_unit_open(e / (Scalar(1) + e));
    }
    case Link::probit:
      return clamp_unit_open(details::standard_normal_cdf(u));
    case Link::cauchit:
      return clamp_unit_open(std::atan(u) / std::numbers::pi_v<Scalar> +
                             Scalar(0.5));
    case Link::cloglog:
      return clamp_unit_open(-std::expm1(-std::exp(u)));
    case Link::sqrt:
      return u * u;
  }
  return u;
}

template <typename Scalar>
inline Scalar inverse_link_deriv(Link link, Scalar u) {
  switch (link) {
    case Link::identity:
      return Scalar(1);
    case Link::log:
      return std::exp(u);
    case Link::logit: {
      const Scalar e = std::exp(-std::abs(u));
      return e / ((Scalar(1) + e) * (Scalar(1) + e));
    }
    case Link::probit:
      return details::standard_normal_pdf(u);
    case Link::cauchit:
      return Scalar(1) / (std::numbers::pi_v<Scalar> * (Scalar(1) + u * u));
    case Link::cloglog:
      return std::exp(u - std::exp(u));
    case Link::sqrt:
      return Scalar(2) * u;
  }
  return Scalar(1);
}

// The link g itself, g(m) = u. Only used to seed IRLS from starting means.
template <typename Scalar>
inline Scalar link_function(Link link, Scalar m) {
  switch (link) {
    case Link::identity:
      return m;
    case Link::log:
      return std::log(m);
    case Link::logit:
      return std::log(m / (Scalar(1) - m));
    case Link::probit: {
      // Newton iterations on the cdf; starting means are never extreme.
      Scalar u = 0;
      for (int it = 0; it < 60; ++it) {
        const Scalar step = (details::standard_normal_cdf(u) - m) /
                            details::standard_normal_pdf(u);
        u -= step;
        if (std::abs(step) < 1e-14) break;
      }
      return u;
    }
    case Link::cauchit:
      return std::tan(std::numbers::pi_v<Scalar> * (m - Scalar(0.5)));
    case Link::cloglog:
      return std::log(-std::log1p(-m));
    case Link::sqrt:
      return std::sqrt(m);
  }
  return m;
}

inline bool in_mean_domain(Family family, double m) {
  switch (family) {
    case Family::normal:
      return std::isfinite(m);
    case Family::bernoulli:
      return m > 0.0 && m < 1.0;
    case Family::poisson:
    case Family::gamma:
    case Family::inverse_gaussian:
    case Family::negative_binomial:
      return m > 0.0 && std::isfinite(m);
  }
  return false;
}

template <typename Scalar>
inline Scalar variance_function(const FamilySpec &family, Scalar m) {
  if (!in_mean_domain(family.kind, static_cast<double>(m))) {
    throw DomainError("mean outside the family's mean domain");
  }
  const auto k = static_cast<Scalar>(family.dispersion);
  switch (family.kind) {
    case Family::normal:
      return k;
    case Family::bernoulli:
      return m * (Scalar(1) - m);
    case Family::poisson:
      return m;
    case Family::gamma:
      return m * m / k;
    case Family::inverse_gaussian:
      return m * m * m / k;
    case Family::negative_binomial:
      return m + m * m / k;
  }
  return m;
}

// Variance used inside the grouped statistics and IRLS weights. Identical to
// variance_function except that sqrt-link means are floored first.
template <typename Scalar>
inline Scalar working_variance(const FamilySpec &family, Link link, Scalar m) {
  if (link == Link::sqrt && m < Scalar(kSqrtLinkMeanFloor)) {
    m = Scalar(kSqrtLinkMeanFloor);
  }
  return variance_function(family, m);
}

/*
 * Log-density of one response as a function of the mean, dropping terms that
 * depend only on y and the dispersion. Its derivative in m is
 * (y - m) / v(m), which is what makes the score take its usual form.
 */
template <typename Scalar>
inline Scalar log_density_kernel(const FamilySpec &family, Scalar y, Scalar m) {
  const auto k = static_cast<Scalar>(family.dispersion);
  switch (family.kind) {
    case Family::normal:
      return -(y - m) * (y - m) / (Scalar(2) * k);
    case Family::bernoulli:
      return y * std::log(m) + (Scalar(1) - y) * std::log1p(-m);
    case Family::poisson:
      return (y > 0 ? y * std::log(m) : Scalar(0)) - m;
    case Family::gamma:
      return k * (-y / m - std::log(m));
    case Family::inverse_gaussian:
      return k * (-y / (Scalar(2) * m * m) + Scalar(1) / m);
    case Family::negative_binomial:
      return (y > 0 ? y * std::log(m) : Scalar(0)) - (y + k) * std::log(m + k);
  }
  return Scalar(0);
}

// True exactly for the family/link combinations known to satisfy the
// regularity conditions of the grouped test.
inline bool validate_pair(Family family, Link link) {
  switch (family) {
    case Family::normal:
      return link == Link::identity;
    case Family::bernoulli:
      return link == Link::logit || link == Link::probit ||
             link == Link::cauchit || link == Link::cloglog;
    case Family::poisson:
      return link == Link::log || link == Link::sqrt;
    case Family::gamma:
    case Family::inverse_gaussian:
    case Family::negative_binomial:
      return link == Link::log;
  }
  return false;
}

inline bool validate_pair(const FamilySpec &family, Link link) {
  return validate_pair(family.kind, link);
}

inline bool is_canonical(Family family, Link link) {
  return (family == Family::normal && link == Link::identity) ||
         (family == Family::bernoulli && link == Link::logit) ||
         (family == Family::poisson && link == Link::log);
}

inline bool is_bounded_link(Link link) {
  return link == Link::logit || link == Link::probit || link == Link::cauchit ||
         link == Link::cloglog;
}

inline std::string_view to_string(Family family) {
  switch (family) {
    case Family::normal:
      return "normal";
    case Family::bernoulli:
      return "bernoulli";
    case Family::poisson:
      return "poisson";
    case Family::gamma:
      return "gamma";
    case Family::inverse_gaussian:
      return "inverse_gaussian";
    case Family::negative_binomial:
      return "negative_binomial";
  }
  return "";
}

inline std::string_view to_string(Link link) {
  switch (link) {
    case Link::identity:
      return "identity";
    case Link::log:
      return "log";
    case Link::logit:
      return "logit";
    case Link::probit:
      return "probit";
    case Link::cauchit:
      return "cauchit";
    case Link::cloglog:
      return "cloglog";
    case Link::sqrt:
      return "sqrt";
  }
  return "";
}

inline Family parse_family(std::string_view name) {
  for (auto f : {Family::normal, Family::bernoulli, Family::poisson,
                 Family::gamma, Family::inverse_gaussian,
                 Family::negative_binomial}) {
    if (name == to_string(f)) return f;
  }
  if (name == "binomial") return Family::bernoulli;
  if (name == "ig") return Family::inverse_gaussian;
  if (name == "nb") return Family::negative_binomial;
  throw InvalidArgument("unknown family '" + std::string(name) + "'");
}

inline Link parse_link(std::string_view name) {
  for (auto l : {Link::identity, Link::log, Link::logit, Link::probit,
                 Link::cauchit, Link::cloglog, Link::sqrt}) {
    if (name == to_string(l)) return l;
  }
  throw InvalidArgument("unknown link '" + std::string(name) + "'");
}

}  // namespace ghl

#endif  // GHL_FAMILIES_HPP_
