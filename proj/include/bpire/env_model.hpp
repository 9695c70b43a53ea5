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

#ifndef BPIRE_ENV_MODEL_HPP
#define BPIRE_ENV_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bpire {

/// Raised when an operation is called outside its documented domain.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// X = 1 + Poisson(lambda).
struct ShiftedPoisson {
  double lambda;
  friend bool operator==(const ShiftedPoisson &, const ShiftedPoisson &) = default;
};

/// X = 1 + G with P(G = k) = q (1 - q)^k.
struct ShiftedGeometric {
  double q;
  friend bool operator==(const ShiftedGeometric &, const ShiftedGeometric &) = default;
};

using OffspringLaw = std::variant<ShiftedPoisson, ShiftedGeometric>;

struct PoissonImmigration {
  double nu;
  friend bool operator==(const PoissonImmigration &, const PoissonImmigration &) = default;
};

/// P(Y = k) = s (1 - s)^k.
struct GeometricImmigration {
  double s;
  friend bool operator==(const GeometricImmigration &, const GeometricImmigration &) = default;
};

struct NoImmigration {
  friend bool operator==(const NoImmigration &, const NoImmigration &) = default;
};

using ImmigrationLaw = std::variant<PoissonImmigration, GeometricImmigration, NoImmigration>;

/// One realized value of the environment: an offspring law, an immigration
/// law, and the probability of drawing this atom in a generation.
struct EnvAtom {
  OffspringLaw offspring;
  ImmigrationLaw immigration = NoImmigration{};
  double prob = 1.0;
  friend bool operator==(const EnvAtom &, const EnvAtom &) = default;
};

/// Finite-atom i.i.d. environment. Immutable once built.
class EnvironmentModel {
public:
  explicit EnvironmentModel(std::vector<EnvAtom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) {
      throw PreconditionError("environment needs at least one atom");
    }
  }

  const std::vector<EnvAtom> &atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const EnvAtom &operator[](std::size_t i) const { return atoms_.at(i); }

  bool has_immigration() const noexcept {
    return std::any_of(atoms_.begin(), atoms_.end(), [](const EnvAtom &a) {
      return !std::holds_alternative<NoImmigration>(a.immigration);
    });
  }

  /// Same atoms with immigration switched off.
  EnvironmentModel without_immigration() const {
    auto copy = atoms_;
    for (auto &a : copy) {
      a.immigration = NoImmigration{};
    }
    return EnvironmentModel(std::move(copy));
  }

  friend bool operator==(const EnvironmentModel &, const EnvironmentModel &) = default;

private:
  std::vector<EnvAtom> atoms_;
};

inline double mean_offspring(const OffspringLaw &law) {
  return std::visit(
      [](const auto &l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ShiftedPoisson>) {
          return 1.0 + l.lambda;
        } else {
          return 1.0 + (1.0 - l.q) / l.q;
        }
      },
      law);
}

inline double mean_offspring(const EnvAtom &atom) { return mean_offspring(atom.offspring); }

/// Per-individual offspring variance (lambda, or (1 - q) / q^2).
inline double offspring_variance(const OffspringLaw &law) {
  return std::visit(
      [](const auto &l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ShiftedPoisson>) {
          return l.lambda;
        } else {
          return (1.0 - l.q) / (l.q * l.q);
        }
      },
      law);
}

inline double mean_immigration(const ImmigrationLaw &law) {
  return std::visit(
      [](const auto &l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PoissonImmigration>) {
          return l.nu;
        } else if constexpr (std::is_same_v<T, GeometricImmigration>) {
          return (1.0 - l.s) / l.s;
        } else {
          return 0.0;
        }
      },
      law);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationEntry {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;

  /// Support, non-degeneracy, parameter ranges and normalization.
  bool structurally_valid() const {
    return std::all_of(entries.begin(), entries.end(), [](const ValidationEntry &e) {
      return e.passed || e.name == "sigma_positive";
    });
  }

  /// Structurally valid and sigma > 0, as the rate experiments need.
  bool usable_for_clt() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const ValidationEntry &e) { return e.passed; });
  }

  const ValidationEntry *find(const std::string &name) const {
    for (const auto &e : entries) {
      if (e.name == name) {
        return &e;
      }
    }
    return nullptr;
  }
};

namespace detail {

inline bool offspring_params_ok(const OffspringLaw &law) {
  return std::visit(
      [](const auto &l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ShiftedPoisson>) {
          return std::isfinite(l.lambda) && l.lambda >= 0.0;
        } else {
          return std::isfinite(l.q) && l.q > 0.0 && l.q <= 1.0;
        }
      },
      law);
}

// P(X = 1) == 1 for this law.
inline bool offspring_degenerate(const OffspringLaw &law) {
  return std::visit(
      [](const auto &l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ShiftedPoisson>) {
          return l.lambda == 0.0;
        } else {
          return l.q == 1.0;
        }
      },
      law);
}

inline bool immigration_params_ok(const ImmigrationLaw &law) {
  return std::visit(
      [](const auto &l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PoissonImmigration>) {
          return std::isfinite(l.nu) && l.nu >= 0.0;
        } else if constexpr (std::is_same_v<T, GeometricImmigration>) {
          return std::isfinite(l.s) && l.s > 0.0 && l.s <= 1.0;
        } else {
          return true;
        }
      },
      law);
}

} // namespace detail

/// Checks every model condition and records it; never throws.
inline ValidationReport validate(const EnvironmentModel &env) {
  ValidationReport report;
  const auto &atoms = env.atoms();

  bool params_ok = true;
  bool probs_positive = true;
  double prob_sum = 0.0;
  for (const auto &a : atoms) {
    params_ok = params_ok && detail::offspring_params_ok(a.offspring) &&
                detail::immigration_params_ok(a.immigration);
    probs_positive = probs_positive && std::isfinite(a.prob) && a.prob > 0.0 && a.prob <= 1.0;
    prob_sum += a.prob;
  }
  report.entries.push_back({"parameters_in_range", params_ok,
                            params_ok ? "ok" : "offspring or immigration parameter out of range"});
  // Both families start at 1, so P(X = 0) = 0 holds whenever parameters are valid.
  report.entries.push_back({"support_starts_at_one", params_ok,
                            "offspring laws are shifted by one"});

  const bool all_degenerate = std::all_of(atoms.begin(), atoms.end(), [](const EnvAtom &a) {
    return detail::offspring_degenerate(a.offspring);
  });
  report.entries.push_back({"nondegenerate", !all_degenerate,
                            all_degenerate ? "P(X0 = 1) = 1: every atom has offspring identically 1"
                                           : "P(X0 = 1) < 1"});

  const bool normalized = probs_positive && std::abs(prob_sum - 1.0) <= 1e-12;
  report.entries.push_back({"probabilities_normalized", normalized,
                            "atom probabilities sum to " + std::to_string(prob_sum)});

  // E log m0 > 0 follows from m > 1 on every non-degenerate atom.
  bool log_mean_positive = !all_degenerate && params_ok;
  report.entries.push_back({"mean_log_m_positive", log_mean_positive,
                            "supercritical: m >= 1 on all atoms, m > 1 on some"});

  bool sigma_positive = false;
  if (params_ok && probs_positive) {
    const double m0 = mean_offspring(atoms.front());
    for (const auto &a : atoms) {
      if (mean_offspring(a) != m0) {
        sigma_positive = true;
      }
    }
  }
  report.entries.push_back(
      {"sigma_positive", sigma_positive,
       sigma_positive ? "log m0 is non-degenerate"
                      : "sigma = 0: all atoms share one mean, unusable for the CLT experiments"});
  return report;
}

// ---------------------------------------------------------------------------
// Lattice diagnostics
// ---------------------------------------------------------------------------

enum class LatticeStatus { Inapplicable, NoSmallLattice, Warning };

struct NonLatticeDiagnostic {
  LatticeStatus status = LatticeStatus::Inapplicable;
  /// Smallest denominator d <= 64 found for a log-mean ratio (Warning only).
  int denominator = 0;
  std::pair<std::size_t, std::size_t> atoms{0, 0};
  /// Span h when log m0 is supported on a + hZ with commensurable
  /// differences up to denominator 64. Two distinct atoms are always lattice.
  std::optional<double> support_span;
  std::string message;
};

namespace detail {

// Smallest d <= max_den with |ratio - p/d| <= tol for some integer p, or 0.
inline int small_denominator(double ratio, int max_den, double tol) {
  for (int d = 1; d <= max_den; ++d) {
    const double scaled = ratio * d;
    if (std::abs(scaled - std::round(scaled)) <= tol * d) {
      return d;
    }
  }
  return 0;
}

} // namespace detail

/**
 * Heuristic search for lattice structure in log m0. Reports the smallest
 * denominator d <= 64 for which a ratio log m_i / log m_j of distinct atom
 * log-means sits within 1e-9 of p/d. Irrationality is not decidable from
 * floating point, so this only ever warns.
 */
inline NonLatticeDiagnostic non_lattice_heuristic(const EnvironmentModel &env) {
  constexpr int kMaxDen = 64;
  constexpr double kTol = 1e-9;

  std::vector<std::pair<double, std::size_t>> logs;
  for (std::size_t i = 0; i < env.size(); ++i) {
    const double lm = std::log(mean_offspring(env[i]));
    const bool seen = std::any_of(logs.begin(), logs.end(), [&](const auto &p) {
      return std::abs(p.first - lm) <= 1e-12 * std::max(1.0, std::abs(lm));
    });
    if (!seen) {
      logs.emplace_back(lm, i);
    }
  }

  NonLatticeDiagnostic out;
  if (logs.size() < 2) {
    out.status = LatticeStatus::Inapplicable;
    out.message = "inapplicable: fewer than two atoms with distinct means";
    return out;
  }

  out.status = LatticeStatus::NoSmallLattice;
  int best = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    for (std::size_t j = 0; j < logs.size(); ++j) {
      if (i == j || logs[j].first == 0.0) {
        continue;
      }
      const int d = detail::small_denominator(logs[i].first / logs[j].first, kMaxDen, kTol);
      if (d != 0 && (best == 0 || d < best)) {
        best = d;
        out.atoms = {logs[i].second, logs[j].second};
      }
    }
  }
  if (best != 0) {
    out.status = LatticeStatus::Warning;
    out.denominator = best;
  }

  // Differences from the first support point; commensurable iff every ratio
  // against the first difference is (numerically) rational.
  const double base = logs[1].first - logs[0].first;
  int lcm_den = 1;
  bool commensurable = true;
  for (std::size_t i = 2; i < logs.size() && commensurable; ++i) {
    const int d = detail::small_denominator((logs[i].first - logs[0].first) / base, kMaxDen, kTol);
    if (d == 0) {
      commensurable = false;
    } else {
      lcm_den = std::lcm(lcm_den, d);
    }
  }
  if (commensurable) {
    out.support_span = std::abs(base) / lcm_den;
  }

  if (out.status == LatticeStatus::Warning) {
    out.message = "warning: log-mean ratio of atoms " + std::to_string(out.atoms.first) + " and " +
                  std::to_string(out.atoms.second) + " is close to a rational with denominator " +
                  std::to_string(best);
  } else {
    out.message = "no small-lattice structure detected";
  }
  if (out.support_span) {
    out.message += "; support of log m0 lies on a lattice with span " +
                   std::to_string(*out.support_span);
  }
  return out;
}

} // namespace bpire

#endif // BPIRE_ENV_MODEL_HPP
