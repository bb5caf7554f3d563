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
#include <json.hpp>

#include "afl/data.h"
#include "afl/errors.h"
#include "afl/eval.h"
#include "afl/model.h"
#include "afl/optimizer.h"
#include "test_util.h"

namespace afl {
namespace {

// One feature; class = [x > 0].
FederatedDataset threshold_data() {
  DomainDataset a{0, "a", {{{1.0}, 1}, {{2.0}, 1}, {{-1.0}, 0}, {{-3.0}, 1}}};
  DomainDataset b{1, "b", {{{-2.0}, 0}, {{0.5}, 1}}};
  return FederatedDataset({a, b}, 2, 1);
}

TEST(Evaluate, AccuraciesAndAggregates) {
  const FederatedDataset ds = threshold_data();
  const ModelParams w(2, 1, 100.0, {-5.0, 0.0, 5.0, 0.0});
  const DomainMetrics m = evaluate(w, ds);
  EXPECT_EQ(m.accuracies, (std::vector<double>{75.0, 100.0}));
  EXPECT_EQ(m.sizes, (std::vector<std::size_t>{4, 2}));
  EXPECT_NEAR(m.uniform_accuracy, (4 * 75.0 + 2 * 100.0) / 6, 1e-9);
  EXPECT_EQ(m.worst_accuracy, 75.0);
  EXPECT_EQ(m.worst_domain, 0u);
  EXPECT_EQ(m.worst_loss, std::max(m.losses[0], m.losses[1]));
  const std::vector<double> train_weights = {0.5, 0.5};
  EXPECT_NEAR(evaluate(w, ds, train_weights).uniform_accuracy, 87.5, 1e-9);
  EXPECT_ANY_THROW(evaluate(w, ds, std::vector<double>{1.0}));
}

TEST(Evaluate, PerfectClassifierAndSingleDomain) {
  DomainDataset a{0, "a", {{{1.0}, 1}, {{-1.0}, 0}}};
  const FederatedDataset ds({a}, 2, 1);
  const ModelParams w(2, 1, 100.0, {-5.0, 0.0, 5.0, 0.0});
  const DomainMetrics m = evaluate(w, ds);
  EXPECT_EQ(m.accuracies[0], 100.0);
  EXPECT_EQ(m.worst_accuracy, 100.0);
  EXPECT_EQ(m.uniform_accuracy, m.accuracies[0]);
}

TEST(Evaluate, TiesPredictLowestClass) {
  const FederatedDataset ds = testing::featureless({{1, 1}});
  const DomainMetrics m = evaluate(ModelParams(2, 0, 1.0), ds);
  EXPECT_EQ(m.accuracies[0], 50.0);
}

TEST(CheckAligned, DetectsMismatch) {
  const FederatedDataset a = testing::featureless({{1, 1}, {2, 2}});
  const FederatedDataset b = testing::featureless({{1, 1}});
  EXPECT_NO_THROW(check_aligned(a, a));
  EXPECT_THROW(check_aligned(a, b), SchemaError);
}

TEST(Fairness, IdenticalClassesHaveZeroGap) {
  const FederatedDataset ds = testing::featureless({{2, 3}, {2, 3}});
  const FairnessReport r = fairness_report(ModelParams(2, 0, 1.0, {0.1, 0.4}), ds);
  EXPECT_EQ(r.losses[0], r.losses[1]);
  EXPECT_EQ(r.gap, 0.0);
}

TEST(Fairness, Prop1UniformVersusAfl) {
  const FederatedDataset ds = synth_proposition1(100);
  TrainConfig cfg;
  cfg.iterations = 5000;
  cfg.radius = 3.0;
  const FairnessReport u = fairness_report(uniform_baseline(cfg, ds).output_model(), ds);
  const FairnessReport a = fairness_report(stochastic_afl(cfg, ds).output_model(), ds);
  EXPECT_EQ(u.worst_class, 1u);
  EXPECT_NEAR(u.worst_loss, std::log(4.0 / std::sqrt(3.0)), 0.01);
  EXPECT_NEAR(a.worst_loss, std::log(2.0), 0.01);
  EXPECT_LT(a.worst_loss, u.worst_loss);
  EXPECT_EQ(u.worst_loss, std::max(u.losses[0], u.losses[1]));
}

TEST(Fairness, EmptyClassIsExcludedWithWarning) {
  const FederatedDataset ds = threshold_data();
  const ModelParams w(2, 1, 100.0, {-1.0, 0.0, 1.0, 0.0});
  const ProtectedSplitter by_sign = [](std::size_t, const LabeledExample& e) -> std::optional<std::size_t> {
    if (e.features[0] == 0.5) return std::nullopt;
    return e.features[0] > 0 ? 0 : 1;
  };
  const FairnessReport r = fairness_report(w, ds, by_sign, {"pos", "neg", "none"});
  EXPECT_EQ(r.class_names, (std::vector<std::string>{"pos", "neg"}));
  EXPECT_EQ(r.sizes, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(r.excluded, (std::vector<std::string>{"none"}));
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_EQ(r.worst_loss, std::max(r.losses[0], r.losses[1]));
  EXPECT_EQ(r.best_loss, std::min(r.losses[0], r.losses[1]));
}

DomainMetrics metrics(std::vector<double> acc) {
  DomainMetrics m;
  for (std::size_t k = 0; k < acc.size(); ++k) {
    m.domain_names.push_back("dom" + std::to_string(k));
    m.losses.push_back(0.1);
    m.sizes.push_back(10);
  }
  m.accuracies = acc;
  m.uniform_accuracy = 0.0;
  for (double a : acc) m.uniform_accuracy += a / acc.size();
  m.worst_accuracy = *std::min_element(acc.begin(), acc.end());
  return m;
}

TEST(RenderTable, SingleDomainSingleRun) {
  const RenderedTable t = render_table({{"L_U", {metrics({71.25})}}});
  EXPECT_EQ(t.csv, "training,runs,U_mean,U_std,D_Lambda_mean,D_Lambda_std\nL_U,1,71.250000,0.000000,71.250000,0.000000\n");
  EXPECT_NE(t.text.find("71.25"), std::string::npos);
  EXPECT_EQ(t.text.find("dom0"), std::string::npos);
}

TEST(RenderTable, FourRowLayoutAndStability) {
  const std::vector<ResultRow> rows = {
      {"L_doctorate", {metrics({70, 50}), metrics({72, 52})}},
      {"L_non-doctorate", {metrics({60, 80}), metrics({60, 80})}},
      {"L_U", {metrics({65, 75})}},
      {"L_D_Lambda", {metrics({72, 70})}},
  };
  const RenderedTable a = render_table(rows);
  const RenderedTable b = render_table(rows);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_NE(a.text.find("71.00 +/- 1.41"), std::string::npos);
  EXPECT_NE(a.csv.find("dom0_mean,dom0_std,dom1_mean,dom1_std"), std::string::npos);
  std::size_t lines = 0;
  for (char c : a.csv) lines += c == '\n';
  EXPECT_EQ(lines, 5u);
  // Identical runs render identical cells.
  EXPECT_NE(a.text.find("60.00 +/- 0.00"), std::string::npos);
}

TEST(MetricsJson, HasDomainFields) {
  const FederatedDataset ds = threshold_data();
  const auto j = nlohmann::json::parse(metrics_json(evaluate(ModelParams(2, 1, 1.0), ds)));
  EXPECT_EQ(j["domains"].size(), 2u);
  EXPECT_TRUE(j.contains("worst_accuracy"));
}

TEST(MeanStd, SampleStandardDeviation) {
  const std::vector<double> v = {1, 2, 3, 4};
  const MeanStd m = mean_std(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.stddev, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(mean_std(std::vector<double>{7}).stddev, 0.0);
}

}  // namespace
}  // namespace afl
