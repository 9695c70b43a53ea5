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

#ifndef BPIRE_RNG_HPP
#define BPIRE_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace bpire {

/**
 * Philox4x32-10 block function (Salmon et al., SC'11, "Parallel random
 * numbers: as easy as 1, 2, 3"). Maps a 128-bit counter and a 64-bit key to
 * 128 pseudo-random bits with no internal state.
 */
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter &c, const Key &k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// SplitMix64 finalizer; used to spread user seeds over the key space.
constexpr std::uint64_t splitmix64_mix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/**
 * Sequential view over one counter-based substream. Satisfies the
 * UniformRandomBitGenerator requirements. The n-th output is a pure function
 * of (key, stream id, tag, n).
 */
class Generator {
public:
  using result_type = std::uint64_t;

  constexpr Generator(Philox4x32::Key key, std::uint64_t stream_id,
                      std::uint32_t tag) noexcept
      : key_(key), ctr_{static_cast<std::uint32_t>(stream_id),
                        static_cast<std::uint32_t>(stream_id >> 32), tag, 0u} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (buffered_ == 0) {
      const auto out = Philox4x32::block(ctr_, key_);
      ++ctr_[3];
      buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
      buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
      buffered_ = 2;
    }
    return buffer_[2 - buffered_--];
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller (one output per two uniforms).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/**
 * A replicate's random stream, identified by (master_seed, stream_id).
 * Substreams are addressed by a 32-bit tag so that independent random
 * decisions (environment draw, offspring, immigration, ...) never share
 * draws, no matter how many variates each one consumes.
 */
class RngStream {
public:
  constexpr RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : master_seed_(master_seed), stream_id_(stream_id),
        key_{static_cast<std::uint32_t>(splitmix64_mix(master_seed)),
             static_cast<std::uint32_t>(splitmix64_mix(master_seed) >> 32)} {}

  constexpr std::uint64_t master_seed() const noexcept { return master_seed_; }
  constexpr std::uint64_t stream_id() const noexcept { return stream_id_; }

  constexpr Generator substream(std::uint32_t tag) const noexcept {
    return Generator(key_, stream_id_, tag);
  }

private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  Philox4x32::Key key_;
};

} // namespace bpire

#endif // BPIRE_RNG_HPP
