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

#include <gtest/gtest.h>

#include "afl/data.h"
#include "afl/model.h"
#include "afl/oracle.h"
#include "afl/rng.h"
#include "test_util.h"

namespace afl {
namespace {

double entropy(std::vector<double> q) {
  double h = 0.0;
  for (double x : q) h -= x > 0 ? x * std::log(x) : 0.0;
  return h;
}

TEST(Prop1Analytics, ClosedForms) {
  const auto a = oracle::prop1_analytics();
  EXPECT_EQ(a.uniform_solution, 0.25);
  EXPECT_NEAR(a.minimax_value, 0.6931472, 1e-7);
  EXPECT_NEAR(a.uniform_agnostic_loss, 0.8369882, 1e-7);
  EXPECT_NEAR(a.gap, 0.1438410, 1e-7);
  EXPECT_NEAR(a.uniform_agnostic_loss - a.minimax_value, a.gap, 1e-15);
}

TEST(GridMinimax, Prop1Value) {
  const FederatedDataset ds = synth_proposition1(100);
  const auto r = oracle::grid_minimax(ds, {}, 1e-4);
  EXPECT_NEAR(r.value, std::log(2.0), 1e-4);
  EXPECT_NEAR(r.argmin[1], 0.5, 1e-4);
}

TEST(GridMinimax, RefinementIsMonotone) {
  const FederatedDataset ds = synth_proposition1(100);
  double prev = INFINITY;
  for (double res : {0.1, 0.01, 0.001, 1e-4}) {
    const double v = oracle::grid_minimax(ds, {}, res).value;
    EXPECT_LE(v, prev + res);
    EXPECT_GE(v, std::log(2.0) - 1e-12);
    prev = v;
  }
}

TEST(GridMinimax, SingleDomainFindsFrequencies) {
  const FederatedDataset ds = testing::featureless({{2, 5, 3}});
  const auto r = oracle::grid_minimax(ds, {}, 1e-3);
  EXPECT_NEAR(r.argmin[0], 0.2, 1e-3);
  EXPECT_NEAR(r.argmin[1], 0.5, 1e-3);
  EXPECT_NEAR(r.value, entropy({0.2, 0.5, 0.3}), 1e-9);
}

TEST(GridMinimax, SingletonMeanIsUniformLoss) {
  const FederatedDataset ds = testing::featureless({{1, 3}, {4, 2}});
  const auto m_bar = ds.empirical_proportions();
  const auto r = oracle::grid_minimax(ds, {m_bar}, 1e-4);
  EXPECT_NEAR(r.value, oracle::constant_feature_min_loss(ds, m_bar), 1e-7);
  EXPECT_NEAR(r.value, entropy({0.5, 0.5}), 1e-7);
}

TEST(GridMinimax, RejectsLargeOrVaryingInstances) {
  EXPECT_ANY_THROW(oracle::grid_minimax(testing::featureless({{1, 1, 1, 1}}), {}, 0.1));
  DomainDataset d{0, "v", {{{1.0}, 0}, {{2.0}, 1}}};
  EXPECT_ANY_THROW(oracle::grid_minimax(FederatedDataset({d}, 2, 1), {}, 0.1));
}

TEST(BinaryMinimax, AgreesWithGrid) {
  const FederatedDataset ds = testing::featureless({{7, 2}, {5, 5}, {1, 8}});
  const auto fine = oracle::binary_minimax(ds, {});
  const auto grid = oracle::grid_minimax(ds, {}, 1e-4);
  EXPECT_LE(fine.value, grid.value + 1e-12);
  EXPECT_NEAR(fine.value, grid.value, 1e-4);
}

TEST(TwoDomainDual, MatchesGridAndClosedForm) {
  const FederatedDataset ds = testing::featureless({{9, 1, 0}, {3, 6, 1}});
  const double dual = oracle::two_domain_dual_minimax(ds);
  EXPECT_NEAR(dual, oracle::grid_minimax(ds, {}, 1e-3).value, 2e-3);
  EXPECT_NEAR(dual, 0.915053174669, 1e-11);
  // Symmetric instance: the maximizing mixture is 1/2.
  const FederatedDataset sym = testing::featureless({{12, 6, 2}, {2, 6, 12}});
  EXPECT_NEAR(oracle::two_domain_dual_minimax(sym), entropy({0.35, 0.3, 0.35}), 1e-12);
}

TEST(QpProjection, KnownPointsAndKkt) {
  EXPECT_EQ(oracle::qp_projection_oracle(std::vector<double>{0.2, 0.8}), (std::vector<double>{0.2, 0.8}));
  const auto x = oracle::qp_projection_oracle(std::vector<double>{2, 0});
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_EQ(x[1], 0.0);
  RngStream rng(51, 0, RngPurpose::kTest);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> v(2 + rng.uniform_index(5));
    for (double& e : v) e = 2 * rng.normal();
    EXPECT_LE(oracle::kkt_residual(v, oracle::qp_projection_oracle(v)).max(), 1e-10);
  }
  const std::vector<double> v = {0.9, 0.4};
  EXPECT_GT(oracle::kkt_residual(v, std::vector<double>{0.5, 0.5}).max(), 0.1);
}

TEST(ExactVariances, IndependentGradientAgreesWithModel) {
  RngStream rng(52, 0, RngPurpose::kTest);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> coef(3 * 3), x(2);
    for (double& c : coef) c = rng.normal();
    for (double& e : x) e = rng.normal();
    const std::size_t y = rng.uniform_index(3);
    const ModelParams w(3, 2, 1e6, coef);
    const auto a = oracle::example_gradient(coef, 3, x, y);
    const auto b = example_grad(w, x, y);
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-12);
    EXPECT_NEAR(oracle::example_loss(coef, 3, x, y), example_loss(w, x, y), 1e-12);
  }
}

TEST(ExactVariances, DeterministicLimits) {
  // One example per domain: no intra-domain spread.
  const FederatedDataset ds = testing::featureless({{1, 0}, {0, 1}});
  const std::vector<double> w = {0.3, -0.2};
  const auto v = oracle::exact_variances(w, ds, std::vector<double>{0.5, 0.5});
  EXPECT_NEAR(v.sigma2_intra, 0.0, 1e-15);
  EXPECT_NEAR(v.perdomain, 0.0, 1e-15);
  EXPECT_NEAR(v.weighted, v.sigma2_outer, 1e-15);
  const auto dirac = oracle::exact_variances(w, ds, std::vector<double>{1.0, 0.0});
  EXPECT_NEAR(dirac.weighted, 0.0, 1e-15);
}

}  // namespace
}  // namespace afl
