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

// Per-domain test metrics, protected-class fairness reports and the
// experiment tables built from them.

#ifndef AFL_EVAL_H_
#define AFL_EVAL_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afl/data.h"
#include "afl/model.h"

namespace afl {

struct DomainMetrics {
  std::vector<std::string> domain_names;
  std::vector<double> losses;
  std::vector<double> accuracies;  // percent
  std::vector<std::size_t> sizes;
  // Aggregates weighted by `aggregate_weights` (test proportions by default).
  double uniform_accuracy = 0.0;
  double uniform_loss = 0.0;
  // min accuracy / max loss over domains.
  double worst_accuracy = 0.0;
  double worst_loss = 0.0;
  std::size_t worst_domain = 0;  // argmin accuracy, lowest index on ties
};

// aggregate_weights must be a probability vector over the domains when
// given, e.g. the training proportions.
DomainMetrics evaluate(const ModelParams& w, const FederatedDataset& test,
                       std::span<const double> aggregate_weights = {});

// Throws SchemaError unless both datasets have the same domains, classes and
// features, in the same order.
void check_aligned(const FederatedDataset& train, const FederatedDataset& test);

// Maps an example to its protected class; nullopt drops the example.
using ProtectedSplitter = std::function<std::optional<std::size_t>(
    std::size_t domain, const LabeledExample& example)>;

struct FairnessReport {
  std::vector<std::string> class_names;
  std::vector<double> losses;
  std::vector<std::size_t> sizes;
  double worst_loss = 0.0;
  std::size_t worst_class = 0;
  double best_loss = 0.0;
  double gap = 0.0;  // worst_loss - best_loss
  // Classes without examples; they are left out of every field above.
  std::vector<std::string> excluded;
  std::vector<std::string> warnings;
};

FairnessReport fairness_report(const ModelParams& w,
                               const FederatedDataset& test,
                               const ProtectedSplitter& splitter,
                               std::vector<std::string> class_names);

// Protected classes are the dataset's domains.
FairnessReport fairness_report(const ModelParams& w,
                               const FederatedDataset& test);

// One table row: a training objective and its metrics over one or more runs.
struct ResultRow {
  std::string name;
  std::vector<DomainMetrics> runs;
};

struct RenderedTable {
  std::string text;
  std::string csv;
};

// Columns U, one per domain, D_Lambda (accuracies). The per-domain columns are
// omitted for a single domain. Several runs render as mean +- sample
// standard deviation.
RenderedTable render_table(const std::vector<ResultRow>& rows);

// Pretty-printed JSON object for one run's metrics.
std::string metrics_json(const DomainMetrics& metrics);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for one value
};
MeanStd mean_std(std::span<const double> values);

}  // namespace afl

#endif  // AFL_EVAL_H_
