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
#include <cstdint>
#include <fstream>
#include <numeric>

#include <gtest/gtest.h>

#include "afl/data.h"
#include "afl/errors.h"
#include "afl/model.h"
#include "test_util.h"

namespace afl {
namespace {

using testing::TempDir;

CsvSchema simple_schema() {
  CsvSchema s;
  s.features = {{"x", FeatureColumn::Kind::kNumeric, {}, {}},
                {"color", FeatureColumn::Kind::kCategorical, {"red", "blue"}, {}}};
  s.label_column = "y";
  s.label_vocabulary = {"no", "yes"};
  s.domain_column = "site";
  return s;
}

TEST(LoadCsv, CountsDomainsAndProportions) {
  TempDir dir;
  const auto path = dir.write("a.csv",
                              "x,color,y,site\n"
                              "1.5,red,no,A\n"
                              "2,blue,yes,B\n"
                              "-1,blue,yes,A\n");
  const FederatedDataset ds = load_csv(path, simple_schema());
  EXPECT_EQ(ds.num_domains(), 2u);
  EXPECT_EQ(ds.domain_sizes(), (std::vector<std::size_t>{2, 1}));
  const auto m_bar = ds.empirical_proportions();
  EXPECT_DOUBLE_EQ(m_bar[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m_bar[1], 1.0 / 3.0);
  EXPECT_EQ(ds.num_features(), 3u);
  EXPECT_EQ(ds.domain(0).examples[0].features, (std::vector<double>{1.5, 1, 0}));
  EXPECT_EQ(ds.domain(0).examples[1].features, (std::vector<double>{-1, 0, 1}));
  EXPECT_EQ(ds.domain(1).examples[0].label, 1u);
  EXPECT_EQ(ds.domain_names(), (std::vector<std::string>{"A", "B"}));
}

TEST(LoadCsv, AbsentLabelIsSchemaError) {
  TempDir dir;
  const auto path = dir.write("a.csv", "x,color,y,site\n1,red,,A\n");
  EXPECT_THROW(load_csv(path, simple_schema()), SchemaError);
}

TEST(LoadCsv, MissingColumnNamesTheColumn) {
  TempDir dir;
  const auto path = dir.write("a.csv", "x,y,site\n1,no,A\n");
  try {
    load_csv(path, simple_schema());
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("color"), std::string::npos);
  }
}

TEST(LoadCsv, UnknownCategoryPolicy) {
  TempDir dir;
  const auto path = dir.write("a.csv", "x,color,y,site\n1,green,no,A\n2,red,yes,A\n");
  CsvSchema s = simple_schema();
  EXPECT_THROW(load_csv(path, s), SchemaError);
  s.unknown_policy = UnknownCategoryPolicy::kUnknownSlot;
  const FederatedDataset ds = load_csv(path, s);
  EXPECT_EQ(ds.num_features(), 4u);
  EXPECT_EQ(ds.domain(0).examples[0].features, (std::vector<double>{1, 0, 0, 1}));
}

TEST(LoadCsv, EmptyDomainInOrderIsError) {
  TempDir dir;
  const auto path = dir.write("a.csv", "x,color,y,site\n1,red,no,A\n");
  CsvSchema s = simple_schema();
  s.domain_order = {"A", "B"};
  EXPECT_THROW(load_csv(path, s), SchemaError);
}

TEST(LoadCsv, SplitRuleAndVocabularyFile) {
  TempDir dir;
  dir.write("vocab.txt", "red\n\nblue\n");
  const auto path = dir.write("a.csv",
                              "x,color,y,edu\n"
                              "1,red,no,Doctorate\n"
                              "2,blue,yes,Bachelors\n"
                              "3,red,yes,HS-grad\n");
  CsvSchema s = simple_schema();
  s.features[1].vocabulary.clear();
  s.features[1].vocabulary_file = "vocab.txt";
  s.base_dir = dir.path().string();
  s.domain_column.clear();
  s.split_rule = DomainSplitRule{"edu", "Doctorate", "doctorate", "non-doctorate"};
  const FederatedDataset ds = load_csv(path, s);
  EXPECT_EQ(ds.domain_names(), (std::vector<std::string>{"doctorate", "non-doctorate"}));
  EXPECT_EQ(ds.domain_sizes(), (std::vector<std::size_t>{1, 2}));
}

TEST(LoadCsv, IsDeterministic) {
  TempDir dir;
  const auto path = dir.write("a.csv", "x,color,y,site\n1,red,no,A\n2,blue,yes,B\n");
  const FederatedDataset a = load_csv(path, simple_schema());
  const FederatedDataset b = load_csv(path, simple_schema());
  write_csv(a, dir.file("a_out.csv"));
  write_csv(b, dir.file("b_out.csv"));
  EXPECT_EQ(testing::read_file(dir.file("a_out.csv")), testing::read_file(dir.file("b_out.csv")));
}

TEST(WriteCsv, RoundTrips) {
  TempDir dir;
  GaussianSynthParams params;
  params.num_classes = 3;
  params.domains = {{{0.0, 1.0}, 1.0, {0, 0, 0}, 20}, {{1.0, -1.0}, 0.5, {1, 0, -1}, 7}};
  const FederatedDataset ds = synth_gaussian_domains(params, 3);
  write_csv(ds, dir.file("g.csv"));
  const FederatedDataset back = load_csv(dir.file("g.csv"), schema_for_written_csv(ds));
  ASSERT_EQ(back.num_domains(), ds.num_domains());
  for (std::size_t k = 0; k < ds.num_domains(); ++k) {
    ASSERT_EQ(back.domain(k).size(), ds.domain(k).size());
    for (std::size_t i = 0; i < ds.domain(k).size(); ++i) {
      EXPECT_EQ(back.domain(k).examples[i].label, ds.domain(k).examples[i].label);
      EXPECT_EQ(back.domain(k).examples[i].features, ds.domain(k).examples[i].features);
    }
  }
}

TEST(FederatedDataset, RejectsInvalidInstances) {
  EXPECT_THROW(FederatedDataset({}, 2, 0), SchemaError);
  EXPECT_THROW(FederatedDataset({DomainDataset{0, "e", {}}}, 2, 0), SchemaError);
  EXPECT_THROW(FederatedDataset({DomainDataset{0, "a", {{{1.0}, 0}}}}, 2, 2), SchemaError);
  EXPECT_THROW(FederatedDataset({DomainDataset{0, "a", {{{}, 2}}}}, 2, 0), SchemaError);
}

TEST(FederatedDataset, ProportionsSumToOne) {
  const FederatedDataset ds = testing::featureless({{3, 4}, {1, 0}, {7, 6}});
  const auto m_bar = ds.empirical_proportions();
  EXPECT_NEAR(std::accumulate(m_bar.begin(), m_bar.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(ds.total_size(), 21u);
}

TEST(SynthProp1, LabelsByConstruction) {
  const FederatedDataset ds = synth_proposition1(4);
  ASSERT_EQ(ds.num_domains(), 2u);
  std::vector<std::size_t> d1, d2;
  for (const auto& e : ds.domain(0).examples) d1.push_back(e.label);
  for (const auto& e : ds.domain(1).examples) d2.push_back(e.label);
  EXPECT_EQ(d1, (std::vector<std::size_t>{1, 1, 1, 1}));
  EXPECT_EQ(d2, (std::vector<std::size_t>{0, 1, 0, 1}));
}

TEST(SynthProp1, EvenSizesGiveExactFrequencies) {
  for (std::size_t n : {2, 10, 100, 1000}) {
    const FederatedDataset ds = synth_proposition1(n);
    std::size_t ones0 = 0, ones1 = 0;
    for (const auto& e : ds.domain(0).examples) ones0 += e.label;
    for (const auto& e : ds.domain(1).examples) ones1 += e.label;
    EXPECT_EQ(ones0, n);
    EXPECT_EQ(2 * ones1, n);
  }
}

TEST(SynthProp1, OddSizeNeedsFlag) {
  EXPECT_THROW(synth_proposition1(1), std::invalid_argument);
  EXPECT_EQ(synth_proposition1(1, true).domain(1).size(), 1u);
}

TEST(SynthGaussian, DeterministicAndValidated) {
  GaussianSynthParams params;
  params.domains = {{{0.0, 0.0}, 1.0, {0, 0}, 50}};
  const FederatedDataset a = synth_gaussian_domains(params, 9);
  const FederatedDataset b = synth_gaussian_domains(params, 9);
  for (std::size_t i = 0; i < a.domain(0).size(); ++i) {
    EXPECT_EQ(a.domain(0).examples[i].features, b.domain(0).examples[i].features);
    EXPECT_EQ(a.domain(0).examples[i].label, b.domain(0).examples[i].label);
  }
  EXPECT_EQ(a.num_domains(), 1u);
  params.domains[0].covariance_scale = 0.0;
  EXPECT_THROW(synth_gaussian_domains(params, 9), std::invalid_argument);
}

TEST(SynthGaussian, IdenticalDomainsHaveSimilarLosses) {
  GaussianSynthParams params;
  params.domains = {{{0.5, -0.5}, 1.0, {0.2, -0.2}, 4000}, {{0.5, -0.5}, 1.0, {0.2, -0.2}, 4000}};
  const FederatedDataset ds = synth_gaussian_domains(params, 4);
  ModelParams w(2, 2, 10.0, {0.3, -0.2, 0.1, -0.4, 0.5, 0.0});
  EXPECT_NEAR(domain_loss(w, ds.domain(0)), domain_loss(w, ds.domain(1)), 0.05);
}

TEST(StratifiedSplit, KeepsEveryDomainOnBothSides) {
  const FederatedDataset ds = testing::featureless({{5, 5}, {1, 2}});
  const TrainTestSplit split = stratified_split(ds, 0.2, 1);
  EXPECT_EQ(split.train.domain_sizes(), (std::vector<std::size_t>{8, 2}));
  EXPECT_EQ(split.test.domain_sizes(), (std::vector<std::size_t>{2, 1}));
  EXPECT_THROW(stratified_split(ds, 1.0, 1), std::invalid_argument);
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

TEST(LoadIdx, SelectsClassesAsDomains) {
  TempDir dir;
  const std::vector<unsigned char> labels = {0, 2, 6, 2, 1, 6};
  {
    std::ofstream img(dir.file("img"), std::ios::binary);
    put_be32(img, 0x803);
    put_be32(img, 6);
    put_be32(img, 2);
    put_be32(img, 2);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 4; ++j) img.put(static_cast<char>(i == 0 && j == 0 ? 255 : 51));
    }
    std::ofstream lab(dir.file("lab"), std::ios::binary);
    put_be32(lab, 0x801);
    put_be32(lab, 6);
    for (unsigned char l : labels) lab.put(static_cast<char>(l));
  }
  const FederatedDataset ds =
      load_idx_classes(dir.file("img"), dir.file("lab"), {0, 2, 6}, {"a", "b", "c"});
  EXPECT_EQ(ds.domain_sizes(), (std::vector<std::size_t>{1, 2, 2}));
  EXPECT_EQ(ds.num_features(), 4u);
  EXPECT_DOUBLE_EQ(ds.domain(0).examples[0].features[0], 1.0);
  EXPECT_DOUBLE_EQ(ds.domain(0).examples[0].features[1], 0.2);
  EXPECT_EQ(ds.domain(2).examples[0].label, 2u);
  EXPECT_THROW(load_idx_classes(dir.file("lab"), dir.file("lab"), {0}, {"a"}), IoError);
}

}  // namespace
}  // namespace afl
