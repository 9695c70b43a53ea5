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

#include <cstdint>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "bpire/rng.hpp"

namespace bpire {

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswers) {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}),
            (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              K{0xffffffffu, 0xffffffffu}),
            (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              K{0xa4093822u, 0x299f31d0u}),
            (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, SameAddressSameSequence) {
  const RngStream a(42, 7);
  const RngStream b(42, 7);
  auto ga = a.substream(3);
  auto gb = b.substream(3);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(ga(), gb());
  }
}

TEST(RngStream, DistinctAddressesDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {1ull, 2ull}) {
    for (std::uint64_t stream : {0ull, 1ull, 1ull << 40}) {
      for (std::uint32_t tag : {0u, 1u, 8u}) {
        firsts.insert(RngStream(seed, stream).substream(tag)());
      }
    }
  }
  EXPECT_EQ(firsts.size(), 18u);
}

TEST(RngStream, UniformIsOpenAndCentred) {
  auto g = RngStream(9, 0).substream(0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // SE of the mean is sqrt(1/12 / n).
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RngStream, NormalMoments) {
  auto g = RngStream(11, 5).substream(2);
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = g.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

} // namespace bpire
