/*
 * Copyright (C) 2026 bpire contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BPIRE_SAMPLER_HPP
#define BPIRE_SAMPLER_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "bpire/count.hpp"
#include "bpire/env_model.hpp"
#include "bpire/rng.hpp"

namespace bpire {

namespace detail {

inline constexpr std::size_t kLogFactorialTableSize = 256;

inline const std::array<double, kLogFactorialTableSize> &log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactorialTableSize> t{};
    for (std::size_t k = 0; k < t.size(); ++k) {
      t[k] = std::lgamma(static_cast<double>(k) + 1.0);
    }
    return t;
  }();
  return table;
}

/// log(k!) from a table for small k and the Stirling series beyond.
inline double log_factorial(double k) {
  if (k < static_cast<double>(kLogFactorialTableSize)) {
    return log_factorial_table()[static_cast<std::size_t>(k)];
  }
  const double x = k + 1.0;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

/// Poisson by sequential inversion; intended for mean <= 10.
inline std::uint64_t poisson_inversion(double mean, Generator &gen) {
  const double u = gen.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

/// Hormann's transformed rejection with squeeze (PTRS); mean > 10.
inline std::uint64_t poisson_ptrs(double mean, Generator &gen) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = gen.uniform() - 0.5;
    const double v = gen.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::uint64_t>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - log_factorial(k)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

inline std::uint64_t poisson_exact(double mean, Generator &gen) {
  if (mean == 0.0) {
    return 0;
  }
  return mean <= 10.0 ? poisson_inversion(mean, gen) : poisson_ptrs(mean, gen);
}

inline void check_mean(double mean) {
  if (!std::isfinite(mean) || mean < 0.0) {
    throw PreconditionError("Poisson mean must be finite and nonnegative");
  }
}

} // namespace detail

/**
 * Poisson(mean). Exact for mean < threshold (inversion up to mean 10,
 * transformed rejection above). At or above the threshold the draw is
 * round(mean + sqrt(mean) G) with G standard normal; the relative error of
 * that substitution is O(mean^-1/2) <= 2^-20.
 */
inline Count sample_poisson(double mean, Generator &gen,
                            std::uint64_t threshold = kDefaultPromotionThreshold) {
  detail::check_mean(mean);
  if (mean >= static_cast<double>(threshold)) {
    const double value = std::round(mean + std::sqrt(mean) * gen.normal());
    return Count::from_real(value, threshold);
  }
  return Count::from_integer(detail::poisson_exact(mean, gen), threshold);
}

/// Gamma(shape, 1) by Marsaglia and Tsang.
inline double sample_gamma(double shape, Generator &gen) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw PreconditionError("gamma shape must be positive and finite");
  }
  if (shape < 1.0) {
    const double boosted = sample_gamma(shape + 1.0, gen);
    return boosted * std::pow(gen.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = gen.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = gen.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) {
      return d * v;
    }
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

/// Number of failures before the r-th success, success probability q, via
/// the Poisson-Gamma mixture.
inline Count sample_negative_binomial(double r, double q, Generator &gen,
                                      std::uint64_t threshold = kDefaultPromotionThreshold) {
  if (q == 1.0) {
    return Count::exact(0);
  }
  const double rate = sample_gamma(r, gen) * (1.0 - q) / q;
  return sample_poisson(rate, gen, threshold);
}

/**
 * Total offspring of z individuals with i.i.d. offspring law `law`.
 *
 * Exact regime: z + Poisson(z lambda), or z + NegBin(z, q).
 * Log-space regime: log total = log z + log(m + G sqrt(v / z)), the Gaussian
 * limit of the aggregate, floored at log z since every individual has at
 * least one child.
 */
inline Count sample_offspring_total(const Count &z, const OffspringLaw &law, Generator &gen,
                                    std::uint64_t threshold = kDefaultPromotionThreshold) {
  if (z.is_zero()) {
    throw PreconditionError("offspring total needs a positive population");
  }
  if (z.is_exact()) {
    const auto n = static_cast<double>(z.exact_value());
    Count extra;
    if (const auto *p = std::get_if<ShiftedPoisson>(&law)) {
      extra = sample_poisson(n * p->lambda, gen, threshold);
    } else {
      extra = sample_negative_binomial(n, std::get<ShiftedGeometric>(law).q, gen, threshold);
    }
    return add(z, extra, threshold);
  }
  const double log_z = z.log_value();
  const double m = mean_offspring(law);
  const double v = offspring_variance(law);
  const double ratio = std::max(1.0, m + gen.normal() * std::sqrt(v) * std::exp(-0.5 * log_z));
  return Count::log_space(log_z + std::log(ratio));
}

inline std::uint64_t sample_immigration(const ImmigrationLaw &law, Generator &gen) {
  if (const auto *p = std::get_if<PoissonImmigration>(&law)) {
    detail::check_mean(p->nu);
    return detail::poisson_exact(p->nu, gen);
  }
  if (const auto *g = std::get_if<GeometricImmigration>(&law)) {
    if (g->s >= 1.0) {
      return 0;
    }
    return static_cast<std::uint64_t>(std::floor(std::log(gen.uniform()) / std::log1p(-g->s)));
  }
  return 0;
}

/// Atom index by inversion on cumulative probabilities in atom order.
inline std::size_t sample_atom(const EnvironmentModel &env, Generator &gen) {
  const auto &atoms = env.atoms();
  const double u = gen.uniform();
  double cdf = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    cdf += atoms[i].prob;
    if (u < cdf) {
      return i;
    }
  }
  return atoms.size() - 1;
}

// ---------------------------------------------------------------------------
// Closed-form pmfs of the aggregate laws
// ---------------------------------------------------------------------------

/**
 * pmf of the total offspring of z individuals on {0, ..., k_max}:
 * z + Poisson(z lambda) or z + NegBin(z, q). Computed in log space.
 */
inline std::vector<double> offspring_total_pmf(const OffspringLaw &law, std::uint64_t z,
                                               std::size_t k_max) {
  std::vector<double> pmf(k_max + 1, 0.0);
  if (z == 0 || z > k_max) {
    if (z == 0) {
      pmf[0] = 1.0;
    }
    return pmf;
  }
  const auto zd = static_cast<double>(z);
  if (const auto *p = std::get_if<ShiftedPoisson>(&law)) {
    const double mean = zd * p->lambda;
    if (mean == 0.0) {
      pmf[z] = 1.0;
      return pmf;
    }
    double logp = -mean;
    for (std::size_t j = 0; z + j <= k_max; ++j) {
      if (j > 0) {
        logp += std::log(mean) - std::log(static_cast<double>(j));
      }
      pmf[z + j] = std::exp(logp);
    }
  } else {
    const double q = std::get<ShiftedGeometric>(law).q;
    if (q == 1.0) {
      pmf[z] = 1.0;
      return pmf;
    }
    double logp = zd * std::log(q);
    for (std::size_t j = 0; z + j <= k_max; ++j) {
      if (j > 0) {
        const auto jd = static_cast<double>(j);
        logp += std::log((jd + zd - 1.0) / jd) + std::log1p(-q);
      }
      pmf[z + j] = std::exp(logp);
    }
  }
  return pmf;
}

} // namespace bpire

#endif // BPIRE_SAMPLER_HPP
