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

#ifndef BPIRE_COUNT_HPP
#define BPIRE_COUNT_HPP

#include <cmath>
#include <cstdint>

#include "bpire/env_model.hpp"

namespace bpire {

/// Default exact/log-space promotion threshold, 2^40.
inline constexpr std::uint64_t kDefaultPromotionThreshold = std::uint64_t{1} << 40;

/// Thresholds above this would let exact counts lose integer precision in
/// the double arithmetic used by the samplers.
inline constexpr std::uint64_t kMaxPromotionThreshold = std::uint64_t{1} << 52;
inline constexpr std::uint64_t kMinPromotionThreshold = std::uint64_t{1} << 20;

inline void check_promotion_threshold(std::uint64_t threshold) {
  if (threshold < kMinPromotionThreshold || threshold > kMaxPromotionThreshold) {
    throw PreconditionError("promotion threshold must lie in [2^20, 2^52]");
  }
}

/**
 * Population size. Exact below the promotion threshold T, otherwise stored
 * as its natural log (always >= log T). Exact values are < T <= 2^52, so a
 * 64-bit integer is enough.
 */
class Count {
public:
  constexpr Count() = default;

  static constexpr Count exact(std::uint64_t value) noexcept {
    Count c;
    c.exact_ = value;
    return c;
  }

  static Count log_space(double log_value) noexcept {
    Count c;
    c.is_log_ = true;
    c.log_ = log_value;
    return c;
  }

  /// Integer value in whichever representation fits under `threshold`.
  static Count from_integer(std::uint64_t value, std::uint64_t threshold) noexcept {
    return value < threshold ? exact(value) : log_space(std::log(static_cast<double>(value)));
  }

  /// Nonnegative real magnitude, rounded to an integer when it fits exactly.
  static Count from_real(double value, std::uint64_t threshold) noexcept {
    if (!(value > 0.0)) {
      return exact(0);
    }
    if (value < static_cast<double>(threshold)) {
      return exact(static_cast<std::uint64_t>(std::llround(value)));
    }
    return log_space(std::log(value));
  }

  /// log(value) with the same threshold rule as from_real.
  static Count from_log(double log_value, std::uint64_t threshold) noexcept {
    if (log_value >= std::log(static_cast<double>(threshold))) {
      return log_space(log_value);
    }
    return from_real(std::exp(log_value), threshold);
  }

  constexpr bool is_exact() const noexcept { return !is_log_; }
  constexpr bool is_zero() const noexcept { return !is_log_ && exact_ == 0; }

  /// Only meaningful when is_exact().
  constexpr std::uint64_t exact_value() const noexcept { return exact_; }

  /// Natural log of the population; -inf for an exact zero.
  double log_value() const noexcept {
    return is_log_ ? log_ : std::log(static_cast<double>(exact_));
  }

  double to_double() const noexcept {
    return is_log_ ? std::exp(log_) : static_cast<double>(exact_);
  }

  friend bool operator==(const Count &, const Count &) = default;

private:
  bool is_log_ = false;
  std::uint64_t exact_ = 0;
  double log_ = 0.0;
};

/// a + b, re-normalized against the threshold.
inline Count add(const Count &a, const Count &b, std::uint64_t threshold) noexcept {
  if (a.is_exact() && b.is_exact()) {
    return Count::from_integer(a.exact_value() + b.exact_value(), threshold);
  }
  if (b.is_zero()) {
    return a;
  }
  if (a.is_zero()) {
    return b;
  }
  const double la = a.log_value();
  const double lb = b.log_value();
  const double hi = la >= lb ? la : lb;
  const double lo = la >= lb ? lb : la;
  return Count::from_log(hi + std::log1p(std::exp(lo - hi)), threshold);
}

/// a - b for a >= b. Rounds through doubles once either side is log-space.
inline Count subtract(const Count &a, const Count &b, std::uint64_t threshold) {
  if (a.is_exact() && b.is_exact()) {
    if (b.exact_value() > a.exact_value()) {
      throw PreconditionError("count subtraction would be negative");
    }
    return Count::exact(a.exact_value() - b.exact_value());
  }
  if (b.is_zero()) {
    return a;
  }
  const double la = a.log_value();
  const double lb = b.log_value();
  if (lb >= la) {
    return Count::exact(0);
  }
  // log(e^la - e^lb) = la + log(-expm1(lb - la))
  return Count::from_log(la + std::log(-std::expm1(lb - la)), threshold);
}

} // namespace bpire

#endif // BPIRE_COUNT_HPP
