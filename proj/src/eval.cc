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

#include "afl/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "afl/errors.h"

namespace afl {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string cell(const MeanStd& s, bool with_std) {
  return with_std ? fixed(s.mean, 2) + " +/- " + fixed(s.stddev, 2)
                  : fixed(s.mean, 2);
}

}  // namespace

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

DomainMetrics evaluate(const ModelParams& w, const FederatedDataset& test,
                       std::span<const double> aggregate_weights) {
  const std::size_t p = test.num_domains();
  if (w.num_classes() != test.num_classes() ||
      w.num_features() != test.num_features()) {
    throw SchemaError("model shape does not match the test data");
  }
  std::vector<double> weights;
  if (aggregate_weights.empty()) {
    weights = test.empirical_proportions();
  } else {
    if (aggregate_weights.size() != p) {
      throw std::invalid_argument("aggregate weights have wrong dimension");
    }
    weights.assign(aggregate_weights.begin(), aggregate_weights.end());
  }
  DomainMetrics m;
  m.domain_names = test.domain_names();
  m.sizes = test.domain_sizes();
  for (std::size_t k = 0; k < p; ++k) {
    const DomainDataset& d = test.domain(k);
    if (d.size() == 0) throw SchemaError("test domain '" + d.name + "' is empty");
    std::size_t correct = 0;
    for (const auto& ex : d.examples) {
      if (predict_class(w, ex.features) == ex.label) ++correct;
    }
    m.accuracies.push_back(100.0 * static_cast<double>(correct) /
                           static_cast<double>(d.size()));
    m.losses.push_back(domain_loss(w, d));
    m.uniform_accuracy += weights[k] * m.accuracies.back();
    m.uniform_loss += weights[k] * m.losses.back();
  }
  m.worst_domain = static_cast<std::size_t>(
      std::min_element(m.accuracies.begin(), m.accuracies.end()) -
      m.accuracies.begin());
  m.worst_accuracy = m.accuracies[m.worst_domain];
  m.worst_loss = *std::max_element(m.losses.begin(), m.losses.end());
  return m;
}

void check_aligned(const FederatedDataset& train, const FederatedDataset& test) {
  if (train.num_classes() != test.num_classes() ||
      train.num_features() != test.num_features()) {
    throw SchemaError("train and test data have different shapes");
  }
  if (train.domain_names() != test.domain_names()) {
    throw SchemaError("train and test domains differ");
  }
}

FairnessReport fairness_report(const ModelParams& w,
                               const FederatedDataset& test,
                               const ProtectedSplitter& splitter,
                               std::vector<std::string> class_names) {
  const std::size_t n_classes = class_names.size();
  if (n_classes == 0) throw std::invalid_argument("no protected classes");
  std::vector<double> sums(n_classes, 0.0);
  std::vector<std::size_t> counts(n_classes, 0);
  for (std::size_t k = 0; k < test.num_domains(); ++k) {
    for (const auto& ex : test.domain(k).examples) {
      const auto c = splitter(k, ex);
      if (!c) continue;
      if (*c >= n_classes) {
        throw std::invalid_argument("protected class index out of range");
      }
      sums[*c] += example_loss(w, ex.features, ex.label);
      ++counts[*c];
    }
  }
  FairnessReport r;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (counts[c] == 0) {
      r.excluded.push_back(class_names[c]);
      r.warnings.push_back("protected class '" + class_names[c] +
                           "' has no examples and is excluded");
      continue;
    }
    r.class_names.push_back(class_names[c]);
    r.losses.push_back(sums[c] / static_cast<double>(counts[c]));
    r.sizes.push_back(counts[c]);
  }
  if (r.losses.empty()) throw SchemaError("no protected class has examples");
  const auto worst = std::max_element(r.losses.begin(), r.losses.end());
  r.worst_class = static_cast<std::size_t>(worst - r.losses.begin());
  r.worst_loss = *worst;
  r.best_loss = *std::min_element(r.losses.begin(), r.losses.end());
  r.gap = r.worst_loss - r.best_loss;
  return r;
}

FairnessReport fairness_report(const ModelParams& w,
                               const FederatedDataset& test) {
  return fairness_report(
      w, test,
      [](std::size_t domain, const LabeledExample&) {
        return std::optional<std::size_t>(domain);
      },
      test.domain_names());
}

RenderedTable render_table(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("render_table: no rows");
  const auto& first = rows.front().runs.at(0);
  const std::size_t p = first.accuracies.size();
  const bool per_domain = p > 1;

  std::vector<std::string> header = {"training", "U"};
  if (per_domain) {
    for (const auto& n : first.domain_names) header.push_back(n);
  }
  header.push_back("D_Lambda");

  std::vector<std::vector<std::string>> cells;
  std::ostringstream csv;
  csv << "training,runs,U_mean,U_std";
  if (per_domain) {
    for (const auto& n : first.domain_names) csv << ',' << n << "_mean," << n << "_std";
  }
  csv << ",D_Lambda_mean,D_Lambda_std\n";

  for (const auto& row : rows) {
    if (row.runs.empty()) throw std::invalid_argument("row '" + row.name + "' has no runs");
    const bool with_std = row.runs.size() > 1;
    std::vector<std::vector<double>> columns(p + 2);
    for (const auto& run : row.runs) {
      if (run.accuracies.size() != p) {
        throw std::invalid_argument("runs have different domain counts");
      }
      columns[0].push_back(run.uniform_accuracy);
      for (std::size_t k = 0; k < p; ++k) columns[k + 1].push_back(run.accuracies[k]);
      columns[p + 1].push_back(run.worst_accuracy);
    }
    std::vector<std::string> line = {row.name};
    csv << row.name << ',' << row.runs.size();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (!per_domain && c >= 1 && c <= p) continue;
      const MeanStd s = mean_std(columns[c]);
      line.push_back(cell(s, with_std));
      csv << ',' << fixed(s.mean, 6) << ',' << fixed(s.stddev, 6);
    }
    csv << '\n';
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  std::ostringstream text;
  const auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      text << line[c];
      if (c + 1 == line.size()) break;
      text << std::string(width[c] - line[c].size() + 2, ' ');
    }
  };
  emit(header);
  text << '\n';
  for (const auto& line : cells) {
    emit(line);
    text << '\n';
  }
  return {text.str(), csv.str()};
}

std::string metrics_json(const DomainMetrics& m) {
  nlohmann::ordered_json j;
  j["domains"] = m.domain_names;
  j["sizes"] = m.sizes;
  j["losses"] = m.losses;
  j["accuracies"] = m.accuracies;
  j["uniform_accuracy"] = m.uniform_accuracy;
  j["uniform_loss"] = m.uniform_loss;
  j["worst_accuracy"] = m.worst_accuracy;
  j["worst_loss"] = m.worst_loss;
  j["worst_domain"] = m.worst_domain;
  return j.dump(2);
}

}  // namespace afl
