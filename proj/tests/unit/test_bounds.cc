/*
 * Copyright 2026 The AFL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "afl/bounds.h"
#include "afl/errors.h"
#include "afl/objective.h"
#include "afl/rng.h"

namespace afl {
namespace {

BoundInputs base_inputs() {
  BoundInputs in;
  in.domain_sizes = {300, 150, 50};
  in.loss_bound = 2.0;
  in.vc_dimension = 4;
  in.delta = 0.05;
  in.epsilon = 0.05;
  return in;
}

double term(const BoundReport& r, const std::string& name) {
  for (const BoundTerm& t : r.terms) {
    if (t.name == name) return t.value;
  }
  ADD_FAILURE() << "no term " << name;
  return NAN;
}

TEST(CoverSize, KnownCounts) {
  const LambdaDomain diracs =
      LambdaDomain::finite_hull({MixtureWeights::dirac(2, 0), MixtureWeights::dirac(2, 1)});
  EXPECT_EQ(cover_size(diracs, 0.1).count, 2u);
  EXPECT_FALSE(cover_size(diracs, 0.1).is_upper_bound);
  for (double eps : {0.01, 1.0, 10.0}) {
    EXPECT_EQ(cover_size(LambdaDomain::full_simplex(1), eps).count, 1u);
  }
  const CoverSize c = cover_size(LambdaDomain::full_simplex(2), 1.0);
  EXPECT_EQ(c.count, 5u);
  EXPECT_NEAR(c.log_count, std::log(5.0), 1e-12);
  EXPECT_TRUE(c.is_upper_bound);
  EXPECT_THROW(cover_size(LambdaDomain::full_simplex(2), 0.0), ConfigError);
}

TEST(CoverSize, GreedyCoverWhenVerticesAreClose) {
  const LambdaDomain hull = LambdaDomain::finite_hull(
      {MixtureWeights({0.5, 0.5}), MixtureWeights({0.52, 0.48}), MixtureWeights({1.0, 0.0})});
  EXPECT_EQ(cover_size(hull, 0.01).count, 3u);
  const CoverSize c = cover_size(hull, 0.1);
  EXPECT_EQ(c.count, 2u);
  EXPECT_TRUE(c.is_upper_bound);
}

TEST(CoverSize, SaturatesWithExactLog) {
  const CoverSize c = cover_size(LambdaDomain::full_simplex(40), 1e-3);
  EXPECT_TRUE(c.saturated);
  EXPECT_EQ(c.count, UINT64_MAX);
  // r = 80000, log C(80039, 39) by lgamma.
  const double expected = std::lgamma(80040.0) - std::lgamma(40.0) - std::lgamma(80001.0);
  EXPECT_NEAR(c.log_count, expected, 1e-9 * expected);
}

TEST(CoverSize, NonIncreasingInEpsilon) {
  for (std::size_t p : {2, 3, 5}) {
    double prev = INFINITY;
    for (double eps = 0.05; eps < 3.0; eps *= 1.3) {
      const double lc = cover_size(LambdaDomain::full_simplex(p), eps).log_count;
      EXPECT_LE(lc, prev);
      prev = lc;
    }
  }
}

TEST(VcComplexity, KnownValueAndPrecondition) {
  EXPECT_NEAR(vc_complexity_bound(10, 1000, 2.0), std::sqrt(0.04 * std::log(100 * std::exp(1.0))), 1e-12);
  EXPECT_NEAR(vc_complexity_bound(10, 1000, 2.0), 0.4735, 1e-4);
  try {
    vc_complexity_bound(10, 5, 1.0);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("m >= d"), std::string::npos);
  }
  double prev = INFINITY;
  for (std::size_t m : {100, 1000, 10000, 100000}) {
    const double r = vc_complexity_bound(5, m, 1.0);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(UniformBound, SingletonMeanReducesToStandardBound) {
  BoundInputs in = base_inputs();
  in.lambda_domain = LambdaDomain::finite_hull({MixtureWeights(in.proportions())});
  const BoundReport r = theorem1_bound(in, 0.4);
  EXPECT_EQ(r.skewness, 1.0);
  EXPECT_EQ(r.cover.count, 1u);
  EXPECT_NEAR(r.deviation_term, 2.0 * std::sqrt(std::log(1 / 0.05) / (2 * 500.0)), 1e-15);
}

TEST(UniformBound, UnitDomainVertexDoesNotVanish) {
  BoundInputs in;
  in.domain_sizes = {1, 99};
  in.loss_bound = 1.0;
  in.delta = 0.1;
  in.epsilon = 0.5;
  in.vc_dimension = 1;
  in.lambda_domain = LambdaDomain::finite_hull({MixtureWeights::dirac(2, 0)});
  const BoundReport r = theorem1_bound(in, 0.0);
  EXPECT_NEAR(r.skewness, 100.0, 1e-9);
  EXPECT_NEAR(r.deviation_term, std::sqrt(std::log(1 / 0.1) / 2), 1e-12);
}

TEST(UniformBound, TermsSumAndDominateEmpirical) {
  RngStream rng(41, 0, RngPurpose::kTest);
  for (int i = 0; i < 50; ++i) {
    BoundInputs in = base_inputs();
    in.epsilon = 0.01 + rng.uniform01();
    in.delta = 0.01 + 0.9 * rng.uniform01();
    const double emp = rng.uniform01();
    for (auto v : {SkewnessVariant::kMaxOverLambda, SkewnessVariant::kPerLambda}) {
      in.lambda = std::vector<double>{0.2, 0.3, 0.5};
      const BoundReport r = theorem1_bound(in, emp, v);
      double total = emp;
      for (const BoundTerm& t : r.terms) {
        EXPECT_GE(t.value, 0.0);
        total += t.value;
      }
      EXPECT_DOUBLE_EQ(r.total_bound, total);
      EXPECT_GE(r.total_bound, emp);
      EXPECT_DOUBLE_EQ(term(r, "epsilon"), in.loss_bound * in.epsilon);
    }
  }
  EXPECT_EQ(theorem1_bound(base_inputs(), 0.1).variant, "max_over_lambda");
}

TEST(UniformBound, PerLambdaVariantUsesThatMixture) {
  BoundInputs in = base_inputs();
  in.lambda = std::vector<double>{0.2, 0.3, 0.5};
  const BoundReport r = theorem1_bound(in, 0.1, SkewnessVariant::kPerLambda);
  EXPECT_EQ(r.variant, "per_lambda");
  EXPECT_NEAR(r.skewness, skewness(*in.lambda, in.proportions()), 1e-15);
  in.lambda.reset();
  EXPECT_THROW(theorem1_bound(in, 0.1, SkewnessVariant::kPerLambda), ConfigError);
}

TEST(UniformBound, InvalidInputs) {
  BoundInputs in = base_inputs();
  in.delta = 1.0;
  EXPECT_THROW(theorem1_bound(in, 0.1), ConfigError);
  in = base_inputs();
  in.loss_bound = 0.0;
  EXPECT_THROW(theorem1_bound(in, 0.1), ConfigError);
  in = base_inputs();
  in.domain_sizes = {};
  EXPECT_THROW(theorem1_bound(in, 0.1), ConfigError);
}

TEST(UniformBound, MonotoneInSkewnessAndSize) {
  const std::vector<double> m_bar = {0.6, 0.3, 0.1};
  double prev = -INFINITY;
  for (double t = 0.0; t <= 1.0; t += 0.1) {
    BoundInputs in = base_inputs();
    std::vector<double> l = m_bar;
    for (std::size_t k = 0; k < 3; ++k) l[k] = (1 - t) * m_bar[k] + (k == 2 ? t : 0.0);
    in.lambda_domain = LambdaDomain::finite_hull({MixtureWeights(l)});
    const double total = theorem1_bound(in, 0.2).total_bound;
    EXPECT_GT(total, prev);
    prev = total;
  }
  prev = INFINITY;
  for (std::size_t scale = 1; scale <= 256; scale *= 2) {
    BoundInputs in = base_inputs();
    for (auto& n : in.domain_sizes) n *= scale;
    const double total = theorem1_bound(in, 0.2).total_bound;
    EXPECT_LT(total, prev);
    prev = total;
  }
}

TEST(DistanceBound, AddsLossTimesDistance) {
  BoundInputs in = base_inputs();
  const double base = theorem1_bound(in, 0.3).total_bound;
  in.l1_distance = 0.0;
  EXPECT_DOUBLE_EQ(corollary1_bound(in, 0.3).total_bound, base);
  in.l1_distance = 2.0;
  EXPECT_NEAR(corollary1_bound(in, 0.3).total_bound, base + 2 * in.loss_bound, 1e-12);
  in.loss_bound = 1.0;
  in.l1_distance = 0.1;
  const BoundReport r = corollary1_bound(in, 0.3);
  EXPECT_NEAR(r.l1_term, 0.1, 1e-15);
  EXPECT_NEAR(r.total_bound - theorem1_bound(in, 0.3).total_bound, 0.1, 1e-12);
  in.l1_distance.reset();
  EXPECT_THROW(corollary1_bound(in, 0.3), ConfigError);
}

TEST(PerDomain, SingleDomainAndDirac) {
  BoundInputs in;
  in.domain_sizes = {400};
  in.loss_bound = 1.5;
  in.rademacher = {0.0};
  in.lambda = std::vector<double>{1.0};
  EXPECT_NEAR(perdomain_bound(in, 0.2).total_bound, 0.2 + 1.5 * std::sqrt(std::log(1 / 0.05) / 800.0), 1e-15);

  in.domain_sizes = {400, 100, 50};
  in.rademacher = {0.1, 0.2, 0.3};
  in.lambda = std::vector<double>{0.0, 1.0, 0.0};
  const BoundReport r = perdomain_bound(in, 0.0);
  EXPECT_EQ(r.variant, "per_domain");
  EXPECT_NEAR(r.total_bound, 2 * 0.2 + 1.5 * std::sqrt(std::log(3 / 0.05) / 200.0), 1e-15);
  in.rademacher = {0.1};
  EXPECT_THROW(perdomain_bound(in, 0.0), ConfigError);
}

TEST(PerDomain, SkewedComparisonOrdering) {
  // m = 100, m_1 = 1: the per-domain sum of lambda_k / sqrt(m_k) exceeds
  // sqrt(sum lambda_k^2 / m_k) = sqrt(s / m).
  const double m = 100.0;
  const std::vector<double> lambda = {1 / std::sqrt(m), 1 - 1 / std::sqrt(m)};
  const std::vector<double> sizes = {1, m - 1};
  const std::vector<double> m_bar = {1 / m, (m - 1) / m};
  const double joint = std::sqrt(skewness(lambda, m_bar) / m);
  const double split = lambda[0] / std::sqrt(sizes[0]) + lambda[1] / std::sqrt(sizes[1]);
  EXPECT_LT(joint, split);
  EXPECT_NEAR(joint, std::sqrt(0.01 + 0.81 / 99), 1e-12);

  BoundInputs in;
  in.domain_sizes = {1, 99};
  in.loss_bound = 1.0;
  in.rademacher = {0.0, 0.0};
  in.lambda = lambda;
  in.delta = 0.05;
  EXPECT_NEAR(perdomain_bound(in, 0.0).total_bound, split * std::sqrt(std::log(2 / 0.05) / 2), 1e-12);
}

TEST(Skewness, SubAdditivity) {
  RngStream rng(42, 0, RngPurpose::kTest);
  for (int i = 0; i < 200; ++i) {
    const std::size_t p = 2 + rng.uniform_index(5);
    std::vector<double> sizes(p), lambda(p);
    double m = 0.0, s = 0.0;
    for (double& n : sizes) m += (n = 1.0 + static_cast<double>(rng.uniform_index(500)));
    for (double& l : lambda) s += (l = rng.uniform01());
    for (double& l : lambda) l /= s;
    std::vector<double> m_bar(p);
    double split = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      m_bar[k] = sizes[k] / m;
      split += lambda[k] / std::sqrt(sizes[k]);
    }
    EXPECT_LE(std::sqrt(skewness(lambda, m_bar) / m), split + 1e-15);
  }
}

}  // namespace
}  // namespace afl
