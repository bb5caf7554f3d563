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
#include <limits>

#include <gtest/gtest.h>

#include "afl/objective.h"
#include "afl/oracle.h"
#include "afl/projection.h"
#include "afl/rng.h"

namespace afl {
namespace {

TEST(ProjectSimplex, KnownValues) {
  EXPECT_EQ(project_simplex(std::vector<double>{0.3, 0.3, 0.4}), (std::vector<double>{0.3, 0.3, 0.4}));
  EXPECT_EQ(project_simplex(std::vector<double>{0.6, 0.6}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(project_simplex(std::vector<double>{2, 0}), (std::vector<double>{1, 0}));
}

TEST(ProjectSimplex, RejectsNonFinite) {
  EXPECT_ANY_THROW(project_simplex(std::vector<double>{std::nan(""), 0.0}));
  EXPECT_ANY_THROW(project_simplex(std::vector<double>{INFINITY, 0.0}));
  EXPECT_ANY_THROW(project_simplex(std::vector<double>{}));
}

TEST(ProjectSimplex, ZerosArePositive) {
  const auto x = project_simplex(std::vector<double>{5.0, -3.0, -1e-17});
  EXPECT_EQ(x[1], 0.0);
  EXPECT_FALSE(std::signbit(x[1]));
  EXPECT_FALSE(std::signbit(x[2]));
}

TEST(ProjectSimplex, MatchesOracleAndProperties) {
  RngStream rng(31, 0, RngPurpose::kTest);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t p = 2 + rng.uniform_index(5);
    std::vector<double> v(p), u(p);
    for (std::size_t j = 0; j < p; ++j) {
      v[j] = 3.0 * rng.normal();
      u[j] = 3.0 * rng.normal();
    }
    const auto x = project_simplex(v);
    const auto ref = oracle::qp_projection_oracle(v);
    double sum = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      EXPECT_NEAR(x[j], ref[j], 1e-9);
      EXPECT_GE(x[j], 0.0);
      sum += x[j];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(project_simplex(x), x);
    const auto y = project_simplex(u);
    double din = 0.0, dout = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      din += (u[j] - v[j]) * (u[j] - v[j]);
      dout += (y[j] - x[j]) * (y[j] - x[j]);
    }
    EXPECT_LE(dout, din * (1 + 1e-12));
    const double c = 4.0 * rng.normal();
    std::vector<double> shifted = v;
    for (double& s : shifted) s += c;
    const auto xs = project_simplex(shifted);
    for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(xs[j], x[j], 1e-12);
  }
}

TEST(ProjectBall, KnownValues) {
  EXPECT_EQ(project_ball(std::vector<double>{0.3, 0.4}, 1.0), (std::vector<double>{0.3, 0.4}));
  const auto w = project_ball(std::vector<double>{3, 4}, 1.0);
  EXPECT_DOUBLE_EQ(w[0], 0.6);
  EXPECT_DOUBLE_EQ(w[1], 0.8);
  EXPECT_EQ(project_ball(std::vector<double>{0, 0}, 2.0), (std::vector<double>{0, 0}));
  EXPECT_ANY_THROW(project_ball(std::vector<double>{1}, 0.0));
}

TEST(ProjectLambda, FullSimplexTranslation) {
  const std::vector<double> m_bar = {0.2, 0.5, 0.3};
  const LambdaDomain simplex = LambdaDomain::full_simplex(3);
  for (double c : {-3.0, 0.0, 0.25, 10.0}) {
    std::vector<double> v = m_bar;
    for (double& x : v) x += c;
    const MixtureWeights l = project_lambda(v, simplex);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(l[k], m_bar[k], 1e-12);
  }
  EXPECT_ANY_THROW(project_lambda(std::vector<double>{1, 0}, simplex));
}

TEST(ProjectLambda, SingletonHullIsConstant) {
  const MixtureWeights u({0.1, 0.9});
  const LambdaDomain hull = LambdaDomain::finite_hull({u});
  for (double v : {-5.0, 0.0, 7.0}) {
    EXPECT_EQ(project_lambda(std::vector<double>{v}, hull), u);
  }
}

TEST(ProjectLambda, HullUsesVertexCoordinates) {
  const LambdaDomain hull =
      LambdaDomain::finite_hull({MixtureWeights({1, 0, 0}), MixtureWeights({0, 0.5, 0.5})});
  const MixtureWeights l = project_lambda(std::vector<double>{0.9, 0.3}, hull);
  EXPECT_NEAR(l[0], 0.8, 1e-12);
  EXPECT_NEAR(l[1], 0.1, 1e-12);
  EXPECT_NEAR(l[2], 0.1, 1e-12);
}

}  // namespace
}  // namespace afl
