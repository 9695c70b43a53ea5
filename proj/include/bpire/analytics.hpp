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

#ifndef BPIRE_ANALYTICS_HPP
#define BPIRE_ANALYTICS_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bpire/env_model.hpp"

namespace bpire {

/// Thrown when a formula needs sigma > 0.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Exact moments of log m0 over the finite atom support.
class MomentSummary {
public:
  MomentSummary() = default;

  /// (probability, log m) pairs.
  explicit MomentSummary(std::vector<std::pair<double, double>> support)
      : support_(std::move(support)) {
    for (const auto &[p, v] : support_) {
      mu += p * v;
    }
    for (const auto &[p, v] : support_) {
      const double d = v - mu;
      sigma2 += p * d * d;
      mu3 += p * d * d * d;
    }
  }

  double mu = 0.0;
  double sigma2 = 0.0;
  double mu3 = 0.0;

  double sigma() const { return std::sqrt(sigma2); }

  /// E|log m0|^r.
  double abs_moment(double r) const {
    double acc = 0.0;
    for (const auto &[p, v] : support_) {
      acc += p * std::pow(std::abs(v), r);
    }
    return acc;
  }

  const std::vector<std::pair<double, double>> &support() const { return support_; }

private:
  std::vector<std::pair<double, double>> support_;
};

inline MomentSummary log_mean_moments(const EnvironmentModel &env) {
  std::vector<std::pair<double, double>> support;
  support.reserve(env.size());
  for (const auto &a : env.atoms()) {
    support.emplace_back(a.prob, std::log(mean_offspring(a)));
  }
  return MomentSummary(std::move(support));
}

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

/// Phi(x) = erfc(-x / sqrt 2) / 2; absolute error well under 1e-12 on [-8, 8].
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

/// z such that Phi(z) = 0.995.
inline constexpr double kZ995 = 2.5758293035489004;

inline void require_sigma(const MomentSummary &m) {
  if (!(m.sigma2 > 0.0)) {
    throw DomainError("sigma must be positive: the CLT for log Z_n needs a non-degenerate log m0");
  }
}

/// First Edgeworth term Q(x) = mu3 (1 - x^2) phi(x) / (6 sigma^3).
inline double edgeworth_q(double x, const MomentSummary &m) {
  require_sigma(m);
  const double s = m.sigma();
  return m.mu3 * (1.0 - x * x) * std_normal_pdf(x) / (6.0 * s * s * s);
}

/// g(x) = -phi(x) E log W / sigma + Q(x), the limit of sqrt(n)(P(U_n <= x) - Phi(x)).
inline double limit_curve(double x, const MomentSummary &m, double e_log_w) {
  require_sigma(m);
  return -std_normal_pdf(x) * e_log_w / m.sigma() + edgeworth_q(x, m);
}

// ---------------------------------------------------------------------------
// Hypothesis audit
// ---------------------------------------------------------------------------

struct HypothesisEntry {
  std::string name;
  double value;
  bool passed;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;
  NonLatticeDiagnostic lattice;

  const HypothesisEntry *find(const std::string &name) const {
    for (const auto &e : entries) {
      if (e.name == name) {
        return &e;
      }
    }
    return nullptr;
  }
};

struct SeriesResult {
  double value = 0.0;
  bool converged = false;
  std::size_t terms = 0;
};

namespace detail {

/**
 * Sum_k f(k)^power p_k for a pmf given through log p_0 and the log ratio
 * log(p_{k+1} / p_k). Stops once the term ratio has dropped below one and
 * the geometric tail bound t r / (1 - r) is under rel_tol of the partial
 * sum; valid because the ratios of both families decrease in k.
 */
template <typename LogRatio, typename Value>
SeriesResult moment_series(double log_p0, LogRatio log_ratio, Value value, double power,
                           double rel_tol = 1e-12, std::size_t max_terms = 1000000) {
  SeriesResult out;
  double log_p = log_p0;
  double sum = 0.0;
  for (std::size_t k = 0; k < max_terms; ++k) {
    const double v = value(k);
    const double term = v > 0.0 ? std::exp(log_p + power * std::log(v)) : 0.0;
    sum += term;
    const double next_log_p = log_p + log_ratio(k);
    const double v_next = value(k + 1);
    const double next_term = v_next > 0.0 ? std::exp(next_log_p + power * std::log(v_next)) : 0.0;
    if (k >= 1 && term > 0.0) {
      const double r = next_term / term;
      if (r < 1.0 && next_term / (1.0 - r) <= rel_tol * sum) {
        out.value = sum + next_term;
        out.converged = true;
        out.terms = k + 2;
        return out;
      }
    }
    if (sum > 0.0 && term == 0.0 && next_term == 0.0 && k > 0) {
      out.value = sum;
      out.converged = true;
      out.terms = k + 1;
      return out;
    }
    log_p = next_log_p;
  }
  out.value = sum;
  out.terms = max_terms;
  return out;
}

} // namespace detail

/// E_xi X^p for one offspring law (X = 1 + K).
inline SeriesResult offspring_power_moment(const OffspringLaw &law, double p) {
  const auto shifted = [](std::size_t k) { return static_cast<double>(k) + 1.0; };
  if (const auto *sp = std::get_if<ShiftedPoisson>(&law)) {
    const double lambda = sp->lambda;
    if (lambda == 0.0) {
      return {1.0, true, 1};
    }
    return detail::moment_series(
        -lambda,
        [lambda](std::size_t k) { return std::log(lambda / (static_cast<double>(k) + 1.0)); },
        shifted, p);
  }
  const double q = std::get<ShiftedGeometric>(law).q;
  if (q == 1.0) {
    return {1.0, true, 1};
  }
  const double lr = std::log1p(-q);
  return detail::moment_series(std::log(q), [lr](std::size_t) { return lr; }, shifted, p);
}

/// E Y^delta for one immigration law.
inline SeriesResult immigration_power_moment(const ImmigrationLaw &law, double delta) {
  const auto plain = [](std::size_t k) { return static_cast<double>(k); };
  if (const auto *pi = std::get_if<PoissonImmigration>(&law)) {
    const double nu = pi->nu;
    if (nu == 0.0) {
      return {0.0, true, 1};
    }
    return detail::moment_series(
        -nu, [nu](std::size_t k) { return std::log(nu / (static_cast<double>(k) + 1.0)); }, plain,
        delta);
  }
  if (const auto *gi = std::get_if<GeometricImmigration>(&law)) {
    if (gi->s == 1.0) {
      return {0.0, true, 1};
    }
    const double lr = std::log1p(-gi->s);
    return detail::moment_series(std::log(gi->s), [lr](std::size_t) { return lr; }, plain, delta);
  }
  return {0.0, true, 0};
}

/**
 * Evaluates the moment hypotheses of the exact-rate CLT for the given
 * (p, delta, r). Both law families have every moment, so the finiteness
 * entries pass whenever the series converge; the values are informative.
 */
inline HypothesisReport hypothesis_report(const EnvironmentModel &env, double p = 2.0,
                                          double delta = 2.0, double r = 3.0) {
  if (!(p > 1.0) || !(delta > 0.0) || !(r >= 3.0)) {
    throw PreconditionError("hypothesis audit needs p > 1, delta > 0, r >= 3");
  }
  HypothesisReport report;
  const auto moments = log_mean_moments(env);

  double e_log_r = 0.0;
  for (const auto &[prob, lm] : moments.support()) {
    e_log_r += prob * std::pow(lm, r);
  }
  report.entries.push_back({"E(log m0)^r", e_log_r, std::isfinite(e_log_r),
                            "r = " + std::to_string(r) + ", exact finite sum"});

  double e_imm = 0.0;
  double e_off = 0.0;
  bool imm_ok = true;
  bool off_ok = true;
  for (const auto &a : env.atoms()) {
    const double m = mean_offspring(a);
    const auto y = immigration_power_moment(a.immigration, delta);
    imm_ok = imm_ok && y.converged;
    e_imm += a.prob * y.value / std::pow(m, delta);

    const auto x = offspring_power_moment(a.offspring, p);
    off_ok = off_ok && x.converged;
    e_off += a.prob * std::pow(x.value / std::pow(m, p), delta);
  }
  report.entries.push_back({"E(Y0/m0)^delta", e_imm, imm_ok && std::isfinite(e_imm),
                            imm_ok ? "delta = " + std::to_string(delta)
                                   : "series did not converge within 1e6 terms"});
  report.entries.push_back({"E(E_xi(X0/m0)^p)^delta", e_off, off_ok && std::isfinite(e_off),
                            off_ok ? "p = " + std::to_string(p) + ", delta = " + std::to_string(delta)
                                   : "series did not converge within 1e6 terms"});

  report.entries.push_back({"sigma_positive", moments.sigma(), moments.sigma2 > 0.0,
                            "sigma = " + std::to_string(moments.sigma())});

  report.lattice = non_lattice_heuristic(env);
  const bool lattice_ok =
      report.lattice.status != LatticeStatus::Warning && !report.lattice.support_span;
  report.entries.push_back({"non_lattice", report.lattice.support_span.value_or(0.0), lattice_ok,
                            report.lattice.message});
  return report;
}

} // namespace bpire

#endif // BPIRE_ANALYTICS_HPP
