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

#ifndef GHL_RANDOM_HPP_
#define GHL_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "ghl/families.hpp"

namespace ghl {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/*
 * Counter-based 64-bit generator: output k is mix64(key + k * golden). A
 * stream is identified by its key, and keys for sub-streams are derived by
 * hashing (parent key, index), so replication i gets the same numbers no
 * matter which thread draws them or in what order.
 */
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + (++counter_) * kGolden); }

  // Independent stream `index` of the stream family rooted at `seed`.
  static CounterRng stream(std::uint64_t seed, std::uint64_t index) {
    return CounterRng(mix64(mix64(seed) ^ mix64(index * kGolden + 0x632be59bd9b4e019ULL)));
  }

  CounterRng split(std::uint64_t index) const { return stream(key_, index); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

template <typename Rng>
double sample_poisson(double mean, Rng &rng) {
  if (!(mean > 0.0)) return 0.0;
  return static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
}

// Gamma-Poisson mixture: mean m, variance m + m^2 / size.
template <typename Rng>
double sample_negative_binomial(double mean, double size, Rng &rng) {
  const double lambda = std::gamma_distribution<double>(size, mean / size)(rng);
  return sample_poisson(lambda, rng);
}

// Michael, Schucany and Haas transformation sampler.
template <typename Rng>
double sample_inverse_gaussian(double mean, double lambda, Rng &rng) {
  const double nu = std::normal_distribution<double>(0.0, 1.0)(rng);
  const double y = nu * nu;
  const double x = mean + mean * mean * y / (2.0 * lambda) -
                   mean / (2.0 * lambda) * std::sqrt(4.0 * mean * lambda * y + mean * mean * y * y);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return u <= mean / (mean + x) ? x : mean * mean / x;
}

// One response drawn from the family at the given mean.
template <typename Rng>
double sample_response(const FamilySpec &family, double mean, Rng &rng) {
  switch (family.kind) {
    case Family::normal:
      return std::normal_distribution<double>(mean, std::sqrt(family.dispersion))(rng);
    case Family::bernoulli:
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < mean ? 1.0 : 0.0;
    case Family::poisson:
      return sample_poisson(mean, rng);
    case Family::gamma:
      return std::gamma_distribution<double>(family.dispersion, mean / family.dispersion)(rng);
    case Family::inverse_gaussian:
      return sample_inverse_gaussian(mean, family.dispersion, rng);
    case Family::negative_binomial:
      return sample_negative_binomial(mean, family.dispersion, rng);
  }
  return mean;
}

}  // namespace ghl

#endif  // GHL_RANDOM_HPP_
