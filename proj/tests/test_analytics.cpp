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
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "bpire/analytics.hpp"
#include "test_support.hpp"

namespace bpire {
namespace {

using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

struct BigMoments {
  Big mu, sigma2, mu3;
};

BigMoments big_moments(const EnvironmentModel &env) {
  // m is exactly representable for these laws, so log(m) can be recomputed in 200 digits.
  BigMoments out{0, 0, 0};
  std::vector<std::pair<Big, Big>> pts;
  for (const auto &a : env.atoms()) {
    pts.emplace_back(Big(a.prob), log(Big(mean_offspring(a))));
  }
  for (const auto &[p, v] : pts) out.mu += p * v;
  for (const auto &[p, v] : pts) {
    const Big d = v - out.mu;
    out.sigma2 += p * d * d;
    out.mu3 += p * d * d * d;
  }
  return out;
}

MomentSummary two_point(double m1, double p1, double m2) {
  return MomentSummary({{p1, std::log(m1)}, {1.0 - p1, std::log(m2)}});
}

EnvironmentModel env_of(std::vector<std::pair<double, double>> lambda_prob) {
  std::vector<EnvAtom> atoms;
  for (const auto &[l, p] : lambda_prob) {
    atoms.push_back(EnvAtom{ShiftedPoisson{l}, NoImmigration{}, p});
  }
  return EnvironmentModel(atoms);
}

/// A moment summary with prescribed sigma and mu3, via a skewed two-point law.
MomentSummary with_moments(double sigma, double mu3) {
  // Two points a < b with weights p, 1-p, mean 0: sigma^2 = -ab, mu3 = -ab(a + b).
  const double s = mu3 / (sigma * sigma); // a + b
  const double disc = std::sqrt(s * s + 4.0 * sigma * sigma);
  const double a = 0.5 * (s - disc);
  const double b = 0.5 * (s + disc);
  const double p = b / (b - a);
  return MomentSummary({{p, a}, {1.0 - p, b}});
}

} // namespace

TEST(LogMeanMoments, SingleAtom) {
  const auto m = log_mean_moments(env_of({{1.0, 1.0}}));
  EXPECT_DOUBLE_EQ(m.mu, std::log(2.0));
  EXPECT_EQ(m.sigma2, 0.0);
  EXPECT_EQ(m.mu3, 0.0);
}

TEST(LogMeanMoments, SymmetricPair) {
  const auto m = log_mean_moments(testing::reference_env_a());
  EXPECT_NEAR(m.mu, 0.895880, 5e-7);
  EXPECT_NEAR(m.sigma2, 0.0411005, 5e-7);
  EXPECT_NEAR(m.sigma2, std::pow(0.5 * std::log(1.5), 2), 1e-16);
  EXPECT_NEAR(m.mu3, 0.0, 1e-17);
  EXPECT_NEAR(m.abs_moment(3.0), 0.5 * (std::pow(std::log(2.0), 3) + std::pow(std::log(3.0), 3)), 1e-15);
}

TEST(LogMeanMoments, SkewedPair) {
  const auto m = log_mean_moments(testing::skewed_env());
  EXPECT_NEAR(m.mu, 1.5 * std::log(2.0), 1e-15);
  // two-point law: mu3 = p q (1 - 2p)(b - a)^3 with p = P(upper) = 0.25, b - a = 2 log 2
  EXPECT_NEAR(m.mu3, 0.25 * 0.75 * (1.0 - 0.5) * std::pow(2.0 * std::log(2.0), 3), 1e-14);
  EXPECT_GT(m.mu3, 0.0);
}

TEST(LogMeanMoments, MatchesHighPrecisionOracle) {
  const std::vector<EnvironmentModel> envs = {
      testing::reference_env_a(), testing::skewed_env(),
      env_of({{0.5, 0.2}, {1.0, 0.3}, {4.0, 0.5}}),
      EnvironmentModel({EnvAtom{ShiftedGeometric{0.25}, NoImmigration{}, 0.4},
                        EnvAtom{ShiftedPoisson{1.5}, NoImmigration{}, 0.6}})};
  for (const auto &env : envs) {
    const auto m = log_mean_moments(env);
    const auto o = big_moments(env);
    const double sigma3 = std::pow(static_cast<double>(o.sigma2), 1.5);
    EXPECT_LE(std::abs(m.mu - static_cast<double>(o.mu)), 1e-13 * std::abs(static_cast<double>(o.mu)));
    EXPECT_LE(std::abs(m.sigma2 - static_cast<double>(o.sigma2)), 1e-13 * static_cast<double>(o.sigma2));
    // mu3 can vanish; measure it on the sigma^3 scale.
    EXPECT_LE(std::abs(m.mu3 - static_cast<double>(o.mu3)), 1e-13 * sigma3);
  }
}

TEST(NormalFunctions, Examples) {
  EXPECT_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(std_normal_cdf(1.959963985), 0.975, 1e-9);
  EXPECT_NEAR(std_normal_pdf(0.0), 0.3989422804, 1e-10);
  EXPECT_NEAR(std_normal_cdf(kZ995), 0.995, 1e-15);
}

TEST(NormalFunctions, MatchesQuadratureOracle) {
  for (double x = -8.0; x <= 8.0; x += 0.0625) {
    const double oracle = static_cast<double>(testing::normal_cdf_quadrature(x));
    ASSERT_NEAR(std_normal_cdf(x), oracle, 1e-12) << x;
  }
}

TEST(NormalFunctions, Symmetry) {
  for (double x = -8.0; x <= 8.0; x += 0.001) {
    ASSERT_NEAR(std_normal_cdf(-x) + std_normal_cdf(x), 1.0, 1e-14) << x;
    ASSERT_EQ(std_normal_pdf(-x), std_normal_pdf(x));
  }
}

TEST(EdgeworthQ, Examples) {
  const auto skew = two_point(2.0, 0.75, 8.0);
  EXPECT_EQ(edgeworth_q(1.0, skew), 0.0);
  EXPECT_EQ(edgeworth_q(-1.0, skew), 0.0);
  const auto sym = two_point(2.0, 0.5, 3.0);
  for (double x : {-2.0, 0.0, 0.5, 3.0}) {
    EXPECT_NEAR(edgeworth_q(x, sym), 0.0, 1e-16);
  }
  const auto m = with_moments(1.0, 0.6);
  EXPECT_NEAR(m.sigma2, 1.0, 1e-14);
  EXPECT_NEAR(m.mu3, 0.6, 1e-14);
  EXPECT_NEAR(edgeworth_q(0.0, m), 0.03989423, 5e-9);
}

TEST(EdgeworthQ, EvenAndIntegratesToZero) {
  const auto m = two_point(2.0, 0.75, 8.0);
  for (double x = -6.0; x <= 6.0; x += 0.01) {
    ASSERT_EQ(edgeworth_q(-x, m), edgeworth_q(x, m)) << x;
  }
  const double h = 1e-3;
  double integral = 0.5 * (edgeworth_q(-10.0, m) + edgeworth_q(10.0, m));
  for (int i = 1; i < 20000; ++i) {
    integral += edgeworth_q(-10.0 + i * h, m);
  }
  EXPECT_LT(std::abs(integral * h), 1e-10);
}

TEST(EdgeworthQ, DegenerateThrows) {
  const MomentSummary flat({{1.0, std::log(2.0)}});
  EXPECT_THROW(edgeworth_q(0.0, flat), DomainError);
  EXPECT_THROW(limit_curve(0.0, flat, 0.1), DomainError);
}

TEST(LimitCurve, Examples) {
  const auto sym = two_point(2.0, 0.5, 3.0);
  for (double x : {-1.0, 0.0, 2.0}) {
    EXPECT_NEAR(limit_curve(x, sym, 0.0), 0.0, 1e-16);
  }
  const auto m = with_moments(0.2, 0.0);
  EXPECT_NEAR(limit_curve(0.0, m, 0.5), -0.997356, 5e-7);
  const auto skew = two_point(2.0, 0.75, 8.0);
  EXPECT_LT(std::abs(limit_curve(40.0, skew, 0.3)), 1e-300);
  EXPECT_LT(std::abs(limit_curve(-40.0, skew, 0.3)), 1e-300);
  EXPECT_NEAR(limit_curve(0.7, skew, 0.3),
              -std_normal_pdf(0.7) * 0.3 / skew.sigma() + edgeworth_q(0.7, skew), 1e-16);
}

TEST(HypothesisReport, NoImmigrationMomentIsZero) {
  const auto r = hypothesis_report(testing::reference_env_a(false));
  const auto *e = r.find("E(Y0/m0)^delta");
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->value, 0.0);
  EXPECT_TRUE(e->passed);
}

TEST(HypothesisReport, PoissonSecondMoment) {
  const auto r = hypothesis_report(env_of({{1.0, 1.0}}), 2.0, 1.0, 3.0);
  const auto *e = r.find("E(E_xi(X0/m0)^p)^delta");
  ASSERT_NE(e, nullptr);
  EXPECT_NEAR(e->value, 1.25, 1e-12);
  const auto s = offspring_power_moment(ShiftedPoisson{1.0}, 2.0);
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(s.value, 5.0, 5e-12);
}

TEST(HypothesisReport, GeometricSeriesClosedForms) {
  // X ~ Geometric(q) on {1, 2, ...}: E X = 1/q, E X^2 = (2 - q)/q^2.
  for (double q : {0.2, 0.5, 0.9}) {
    EXPECT_NEAR(offspring_power_moment(ShiftedGeometric{q}, 1.0).value, 1.0 / q, 1e-11 / q);
    EXPECT_NEAR(offspring_power_moment(ShiftedGeometric{q}, 2.0).value, (2.0 - q) / (q * q),
                1e-11 * (2.0 - q) / (q * q));
  }
  // Y ~ Geometric(s) on {0, 1, ...}: E Y^2 = (1 - s)(2 - s)/s^2.
  const double s = 0.4;
  EXPECT_NEAR(immigration_power_moment(GeometricImmigration{s}, 2.0).value,
              (1.0 - s) * (2.0 - s) / (s * s), 1e-11);
  // Poisson(nu): E Y^2 = nu + nu^2.
  EXPECT_NEAR(immigration_power_moment(PoissonImmigration{3.0}, 2.0).value, 12.0, 1e-10);
  EXPECT_EQ(immigration_power_moment(NoImmigration{}, 2.0).value, 0.0);
}

TEST(HypothesisReport, FractionalPowersConverge) {
  const auto s = offspring_power_moment(ShiftedPoisson{30.0}, 1.5);
  EXPECT_TRUE(s.converged);
  // Jensen: (E X)^1.5 <= E X^1.5 <= sqrt(E X E X^2)
  EXPECT_GE(s.value, std::pow(31.0, 1.5));
  EXPECT_LE(s.value, std::sqrt(31.0 * (30.0 + 31.0 * 31.0)));
}

TEST(HypothesisReport, ReferenceEnvironmentEntries) {
  const auto r = hypothesis_report(testing::reference_env_a(), 2.0, 2.0, 3.0);
  for (const char *name : {"E(log m0)^r", "E(Y0/m0)^delta", "E(E_xi(X0/m0)^p)^delta", "sigma_positive"}) {
    const auto *e = r.find(name);
    ASSERT_NE(e, nullptr) << name;
    EXPECT_TRUE(e->passed) << name;
  }
  // E(Y/m)^2 with Y ~ Poisson(1): E Y^2 = 2, averaged over m = 2, 3.
  EXPECT_NEAR(r.find("E(Y0/m0)^delta")->value, 0.5 * (2.0 / 4.0 + 2.0 / 9.0), 1e-12);
  // Two-point log-means are always lattice.
  const auto *lat = r.find("non_lattice");
  ASSERT_NE(lat, nullptr);
  EXPECT_FALSE(lat->passed);
  EXPECT_NEAR(lat->value, std::log(1.5), 1e-12);
}

TEST(HypothesisReport, DegenerateEnvironmentFlagsSigma) {
  const auto r = hypothesis_report(env_of({{1.0, 1.0}}));
  EXPECT_FALSE(r.find("sigma_positive")->passed);
  EXPECT_EQ(r.lattice.status, LatticeStatus::Inapplicable);
}

TEST(HypothesisReport, RejectsBadExponents) {
  const auto env = testing::reference_env_a();
  EXPECT_THROW(hypothesis_report(env, 1.0, 2.0, 3.0), PreconditionError);
  EXPECT_THROW(hypothesis_report(env, 2.0, 0.0, 3.0), PreconditionError);
  EXPECT_THROW(hypothesis_report(env, 2.0, 2.0, 2.5), PreconditionError);
}

} // namespace bpire
