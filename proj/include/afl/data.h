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

// Multi-domain labeled datasets: the in-memory representation, CSV
// ingestion with one-hot encoding, and synthetic generators.

#ifndef AFL_DATA_H_
#define AFL_DATA_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace afl {

struct LabeledExample {
  std::vector<double> features;
  std::size_t label = 0;
};

struct DomainDataset {
  std::size_t id = 0;
  std::string name;
  std::vector<LabeledExample> examples;

  std::size_t size() const { return examples.size(); }
};

// p >= 1 domains sharing a class count and a feature count. Instances are
// validated on construction and are not modified afterwards.
class FederatedDataset {
 public:
  FederatedDataset(std::vector<DomainDataset> domains, std::size_t num_classes,
                   std::size_t num_features,
                   std::vector<std::string> class_names = {},
                   std::vector<std::string> feature_names = {});

  std::size_t num_domains() const { return domains_.size(); }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t num_features() const { return num_features_; }

  const std::vector<DomainDataset>& domains() const { return domains_; }
  const DomainDataset& domain(std::size_t k) const { return domains_.at(k); }

  // m = sum_k m_k.
  std::size_t total_size() const { return total_size_; }
  // (m_1, ..., m_p).
  std::vector<std::size_t> domain_sizes() const;
  // m_k / m.
  std::vector<double> empirical_proportions() const;

  std::vector<std::string> domain_names() const;
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }

  // Largest Euclidean norm of (x, 1) over all examples.
  double max_augmented_feature_norm() const { return max_augmented_norm_; }

 private:
  std::vector<DomainDataset> domains_;
  std::size_t num_classes_;
  std::size_t num_features_;
  std::size_t total_size_ = 0;
  double max_augmented_norm_ = 1.0;
  std::vector<std::string> class_names_;
  std::vector<std::string> feature_names_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

enum class UnknownCategoryPolicy {
  kError,
  // Appends one reserved one-hot slot after the vocabulary.
  kUnknownSlot,
};

struct FeatureColumn {
  std::string name;
  enum class Kind { kNumeric, kCategorical } kind = Kind::kNumeric;
  // Categorical only: either an inline vocabulary or a file with one token
  // per line. The inline list wins when both are set.
  std::vector<std::string> vocabulary;
  std::string vocabulary_file;
};

// Assigns rows to two domains by comparing one column to a fixed value.
// Domain 0 holds matching rows.
struct DomainSplitRule {
  std::string column;
  std::string equals;
  std::string match_name = "match";
  std::string other_name = "other";
};

struct CsvSchema {
  std::vector<FeatureColumn> features;
  std::string label_column;
  // Class tokens in class-index order. When empty, labels must be integers
  // in [0, num_classes).
  std::vector<std::string> label_vocabulary;
  std::size_t num_classes = 0;

  // Exactly one of domain_column / split_rule is used.
  std::string domain_column;
  // Optional explicit domain order for domain_column. Rows with keys outside
  // this list are a schema error. When empty, domains appear in
  // first-appearance order.
  std::vector<std::string> domain_order;
  std::optional<DomainSplitRule> split_rule;

  char delimiter = ',';
  UnknownCategoryPolicy unknown_policy = UnknownCategoryPolicy::kError;
  // Relative vocabulary_file paths are resolved against this directory.
  std::string base_dir;
};

FederatedDataset load_csv(const std::string& path, const CsvSchema& schema);

// Reads a vocabulary file: one token per line, blank lines ignored.
std::vector<std::string> read_vocabulary(const std::string& path);

// Writes a dataset as CSV with columns f0..f{d-1}, label, domain. The output
// round-trips through load_csv with schema_for_written_csv.
void write_csv(const FederatedDataset& dataset, const std::string& path);
CsvSchema schema_for_written_csv(const FederatedDataset& dataset);

// ---------------------------------------------------------------------------
// Splits and generators

struct TrainTestSplit {
  FederatedDataset train;
  FederatedDataset test;
};

// Per-domain split: each domain contributes round(test_fraction * m_k)
// examples to the test side, clamped so both sides keep at least one example.
TrainTestSplit stratified_split(const FederatedDataset& dataset,
                                double test_fraction, std::uint64_t seed);

// Two domains over one constant feature x = 1 and two classes. Domain 0 has
// every label equal to 1; domain 1 alternates labels 0, 1, 0, 1, ... so that
// for even n its empirical label distribution is exactly (1/2, 1/2).
// Odd n is rejected unless allow_odd is set.
FederatedDataset synth_proposition1(std::size_t n_per_domain,
                                    bool allow_odd = false);

struct GaussianDomainSpec {
  std::vector<double> mean;
  double covariance_scale = 1.0;
  // Per-class intercepts of the domain's logistic ground truth.
  std::vector<double> class_offsets;
  std::size_t count = 0;
};

struct GaussianSynthParams {
  std::vector<GaussianDomainSpec> domains;
  std::size_t num_classes = 2;
  // Shared ground-truth class weights, num_classes x d_feat, row major.
  // Generated from the seed when empty.
  std::vector<double> class_weights;
};

// Features x ~ N(mean_k, scale_k * I); labels drawn from
// softmax(W x + offsets_k).
FederatedDataset synth_gaussian_domains(const GaussianSynthParams& params,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// IDX image files (MNIST layout)

// Reads an IDX image file (magic 0x00000803) and label file (0x00000801),
// keeps the examples whose label is in `classes` and puts each kept class in
// its own domain. Pixels are scaled to [0, 1]; labels are renumbered to the
// position of the original label in `classes`.
FederatedDataset load_idx_classes(const std::string& images_path,
                                  const std::string& labels_path,
                                  const std::vector<std::size_t>& classes,
                                  const std::vector<std::string>& class_names);

}  // namespace afl

#endif  // AFL_DATA_H_
