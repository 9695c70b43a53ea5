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

#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "bpire/trajectory.hpp"
#include "test_support.hpp"

namespace bpire {
namespace {

using testing::reference_env_a;
using testing::sample_mean;
using testing::sample_se;

std::vector<double> exp_all(const std::vector<double> &v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i]);
  }
  return out;
}

} // namespace

TEST(SimulatePath, ZeroGenerations) {
  const auto t = simulate_path(reference_env_a(), 0, RngStream(1, 0));
  EXPECT_EQ(t.n, 0u);
  EXPECT_TRUE(t.atom_idx.empty());
  ASSERT_EQ(t.logZ.size(), 1u);
  EXPECT_EQ(t.logZ[0], 0.0);
  EXPECT_EQ(t.S[0], 0.0);
  EXPECT_EQ(t.logW[0], 0.0);
}

TEST(SimulatePath, ShapesAndIdentity) {
  const auto env = reference_env_a();
  const auto t = simulate_path(env, 60, RngStream(7, 3), true);
  ASSERT_EQ(t.logZ.size(), 61u);
  ASSERT_EQ(t.atom_idx.size(), 60u);
  ASSERT_TRUE(t.logZbar);
  for (std::size_t k = 0; k <= 60; ++k) {
    EXPECT_EQ(t.logW[k], t.logZ[k] - t.S[k]);
    EXPECT_LE((*t.logZbar)[k], t.logZ[k]);
    if (k > 0) {
      // Every individual has at least one child.
      EXPECT_GE(t.logZ[k], t.logZ[k - 1]);
      EXPECT_NEAR(t.S[k] - t.S[k - 1], std::log(mean_offspring(env[t.atom_idx[k - 1]])), 1e-12);
    }
  }
}

TEST(SimulatePath, Deterministic) {
  const auto env = reference_env_a();
  const auto a = simulate_path(env, 80, RngStream(11, 5));
  const auto b = simulate_path(env, 80, RngStream(11, 5));
  EXPECT_EQ(a.logZ, b.logZ);
  EXPECT_EQ(a.atom_idx, b.atom_idx);
  const auto c = simulate_path(env, 80, RngStream(11, 6));
  EXPECT_NE(a.logZ, c.logZ);
}

TEST(SimulatePath, CoupledBarEqualsNoImmigrationPath) {
  const auto env = reference_env_a();
  for (std::uint64_t id = 0; id < 50; ++id) {
    const RngStream rng(21, id);
    const auto coupled = simulate_path(env, 40, rng, true);
    const auto bare = simulate_path(env.without_immigration(), 40, rng);
    ASSERT_EQ(*coupled.logZbar, bare.logZ) << id;
    ASSERT_EQ(coupled.S, bare.S);
  }
}

TEST(SimulatePath, EnvironmentIndependentOfCouplingAndThreshold) {
  const auto env = reference_env_a();
  const RngStream rng(5, 9);
  SimulationOptions hi;
  hi.promotion_threshold = std::uint64_t{1} << 50;
  const auto a = simulate_path(env, 50, rng);
  const auto b = simulate_path(env, 50, rng, true, hi);
  EXPECT_EQ(a.atom_idx, b.atom_idx);
  EXPECT_EQ(a.S, b.S);
}

TEST(SimulatePath, Preconditions) {
  const EnvironmentModel bad({EnvAtom{ShiftedPoisson{1.0}, NoImmigration{}, 0.5},
                              EnvAtom{ShiftedPoisson{2.0}, NoImmigration{}, 0.6}});
  EXPECT_THROW(simulate_path(bad, 5, RngStream(1, 0)), PreconditionError);
  SimulationOptions opts;
  opts.promotion_threshold = 100;
  EXPECT_THROW(simulate_path(reference_env_a(), 5, RngStream(1, 0), false, opts), PreconditionError);
}

TEST(SimulateBatch, FirstGenerationMean) {
  const EnvironmentModel env({EnvAtom{ShiftedPoisson{1.0}}});
  const auto b = simulate_batch(env, 1, 200000, 3, {1});
  const auto z = exp_all(b.at(1).logZ);
  EXPECT_NEAR(sample_mean(z), 2.0, 5.0 * sample_se(z));
}

TEST(SimulateBatch, NoImmigrationMartingaleHasUnitMean) {
  SimulationOptions opts;
  opts.couple_no_immigration = true;
  const auto b = simulate_batch(reference_env_a(), 10, 100000, 4, {1, 2, 5, 10}, opts);
  for (const auto &col : b.columns) {
    const auto w = exp_all(col.logWbar());
    EXPECT_NEAR(sample_mean(w), 1.0, 5.0 * sample_se(w)) << "n=" << col.generation;
  }
}

TEST(SimulateBatch, ImmigrationMeanGrows) {
  // E W_n = 1 + sum_k E Y / Pi_{k+1} increases in n.
  const auto b = simulate_batch(reference_env_a(), 10, 100000, 5, {1, 10});
  const auto w1 = exp_all(b.at(1).logW);
  const auto w10 = exp_all(b.at(10).logW);
  const double gap = sample_mean(w10) - sample_mean(w1);
  EXPECT_GT(gap, 5.0 * std::hypot(sample_se(w1), sample_se(w10)));
  // E W_1 = 1 + E Y / E m... per atom: (m + 1) / m averaged.
  const double ew1 = 0.5 * (3.0 / 2.0) + 0.5 * (4.0 / 3.0);
  EXPECT_NEAR(sample_mean(w1), ew1, 5.0 * sample_se(w1));
}

TEST(SimulateBatch, SingleReplicateMatchesPath) {
  const auto env = reference_env_a();
  SimulationOptions opts;
  opts.couple_no_immigration = true;
  opts.stream_offset = 17;
  const auto b = simulate_batch(env, 30, 1, 9, {0, 7, 30}, opts);
  const auto t = simulate_path(env, 30, RngStream(9, 17), true);
  for (std::size_t g : {0u, 7u, 30u}) {
    EXPECT_EQ(b.at(g).logZ[0], t.logZ[g]);
    EXPECT_EQ(b.at(g).S[0], t.S[g]);
    EXPECT_EQ(b.at(g).logW[0], t.logW[g]);
    EXPECT_EQ(b.at(g).logZbar[0], (*t.logZbar)[g]);
  }
}

TEST(SimulateBatch, IndependentOfThreadCount) {
  const auto env = reference_env_a();
  SimulationOptions one;
  one.threads = 1;
  SimulationOptions many;
  many.threads = 5;
  const auto a = simulate_batch(env, 25, 1003, 12, {5, 25}, one);
  const auto b = simulate_batch(env, 25, 1003, 12, {25, 5, 5}, many);
  ASSERT_EQ(b.columns.size(), 2u);
  for (std::size_t g : {5u, 25u}) {
    EXPECT_EQ(a.at(g).logZ, b.at(g).logZ);
    EXPECT_EQ(a.at(g).S, b.at(g).S);
  }
}

TEST(SimulateBatch, SeedsGiveSameDistribution) {
  const auto env = reference_env_a();
  const auto a = simulate_batch(env, 20, 20000, 100, {20});
  const auto b = simulate_batch(env, 20, 20000, 200, {20});
  EXPECT_NE(a.at(20).logW, b.at(20).logW);
  EXPECT_GT(testing::ks_two_sample_pvalue(a.at(20).logW, b.at(20).logW), 1e-3);
}

TEST(SimulateBatch, PromotionThresholdDoesNotMoveLogZ) {
  const auto env = reference_env_a();
  SimulationOptions lo;
  lo.promotion_threshold = std::uint64_t{1} << 40;
  SimulationOptions hi;
  hi.promotion_threshold = std::uint64_t{1} << 50;
  const auto a = simulate_batch(env, 40, 2000, 13, {10, 20, 30, 40}, lo);
  const auto b = simulate_batch(env, 40, 2000, 13, {10, 20, 30, 40}, hi);
  for (const auto &col : a.columns) {
    const auto &other = b.at(col.generation);
    for (std::size_t i = 0; i < a.replicates; ++i) {
      ASSERT_NEAR(col.logZ[i], other.logZ[i], 1e-4) << "n=" << col.generation << " i=" << i;
    }
  }
}

TEST(SimulateBatch, ReachesLogSpaceWithoutOverflow) {
  const EnvironmentModel env({EnvAtom{ShiftedPoisson{9.0}, PoissonImmigration{2.0}}});
  const auto b = simulate_batch(env, 400, 50, 14, {400});
  for (double lz : b.at(400).logZ) {
    EXPECT_TRUE(std::isfinite(lz));
    EXPECT_NEAR(lz, 400.0 * std::log(10.0), 5.0);
  }
}

TEST(SimulateBatch, Errors) {
  const auto env = reference_env_a();
  EXPECT_THROW(simulate_batch(env, 5, 0, 1, {5}), PreconditionError);
  EXPECT_THROW(simulate_batch(env, 5, 10, 1, {6}), PreconditionError);
  SimulationOptions tight;
  tight.max_batch_bytes = 1024;
  try {
    simulate_batch(env, 5, 1000, 1, {5}, tight);
    FAIL() << "expected ResourceError";
  } catch (const ResourceError &e) {
    EXPECT_EQ(e.requested_bytes(), 1000u * 3u * sizeof(double));
  }
  EXPECT_THROW(simulate_batch(env, 5, 10, 1, {}).at(5), std::out_of_range);
}

TEST(SimulateWalkBatch, SharesEnvironmentWithBatch) {
  const auto env = reference_env_a();
  const auto walk = simulate_walk_batch(env, 30, 500, 15, {30, 10});
  const auto full = simulate_batch(env, 30, 500, 15, {10, 30});
  EXPECT_EQ(walk[0], full.at(10).S);
  EXPECT_EQ(walk[1], full.at(30).S);
}

TEST(SimulateWalkBatch, MeanAndVariance) {
  const auto env = reference_env_a();
  const auto walk = simulate_walk_batch(env, 16, 100000, 16, {16});
  const double mu = 0.5 * (std::log(2.0) + std::log(3.0));
  const double sd = 0.5 * (std::log(3.0) - std::log(2.0));
  EXPECT_NEAR(sample_mean(walk[0]), 16.0 * mu, 5.0 * sample_se(walk[0]));
  EXPECT_NEAR(sample_se(walk[0]) * std::sqrt(100000.0), 4.0 * sd, 0.02);
}

} // namespace bpire
