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

#include "afl/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "afl/errors.h"
#include "afl/rng.h"

namespace afl {

FederatedDataset::FederatedDataset(std::vector<DomainDataset> domains,
                                   std::size_t num_classes,
                                   std::size_t num_features,
                                   std::vector<std::string> class_names,
                                   std::vector<std::string> feature_names)
    : domains_(std::move(domains)),
      num_classes_(num_classes),
      num_features_(num_features),
      class_names_(std::move(class_names)),
      feature_names_(std::move(feature_names)) {
  if (domains_.empty()) {
    throw SchemaError("dataset must contain at least one domain");
  }
  if (num_classes_ < 1) throw SchemaError("dataset must have >= 1 class");
  double max_sq = 1.0;
  for (std::size_t k = 0; k < domains_.size(); ++k) {
    DomainDataset& d = domains_[k];
    d.id = k;
    if (d.examples.empty()) {
      throw SchemaError("domain '" + d.name + "' has no examples");
    }
    for (const LabeledExample& e : d.examples) {
      if (e.features.size() != num_features_) {
        throw SchemaError("domain '" + d.name + "': example has " +
                          std::to_string(e.features.size()) +
                          " features, expected " +
                          std::to_string(num_features_));
      }
      if (e.label >= num_classes_) {
        throw SchemaError("domain '" + d.name + "': label " +
                          std::to_string(e.label) + " out of range");
      }
      double sq = 1.0;
      for (double v : e.features) sq += v * v;
      max_sq = std::max(max_sq, sq);
    }
    total_size_ += d.examples.size();
  }
  max_augmented_norm_ = std::sqrt(max_sq);
  if (class_names_.empty()) {
    for (std::size_t c = 0; c < num_classes_; ++c) {
      class_names_.push_back(std::to_string(c));
    }
  }
}

std::vector<std::size_t> FederatedDataset::domain_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(domains_.size());
  for (const auto& d : domains_) sizes.push_back(d.size());
  return sizes;
}

std::vector<double> FederatedDataset::empirical_proportions() const {
  std::vector<double> out;
  out.reserve(domains_.size());
  const auto m = static_cast<double>(total_size_);
  for (const auto& d : domains_) out.push_back(static_cast<double>(d.size()) / m);
  return out;
}

std::vector<std::string> FederatedDataset::domain_names() const {
  std::vector<std::string> names;
  for (const auto& d : domains_) names.push_back(d.name);
  return names;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_record(const std::string& line, char delim,
                                      std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw SchemaError("line " + std::to_string(line_no) +
                      ": unterminated quoted field");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::size_t column_index(const std::unordered_map<std::string, std::size_t>& h,
                         const std::string& name, const std::string& role) {
  auto it = h.find(name);
  if (it == h.end()) {
    throw SchemaError("missing " + role + " column '" + name + "'");
  }
  return it->second;
}

struct EncodedColumn {
  std::size_t csv_index;
  bool categorical;
  std::unordered_map<std::string, std::size_t> vocab;
  std::size_t width;  // number of one-hot slots (incl. unknown slot)
  std::size_t offset;
};

}  // namespace

std::vector<std::string> read_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!t.empty()) tokens.push_back(std::move(t));
  }
  return tokens;
}

FederatedDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path + "'");
  if (schema.domain_column.empty() == !schema.split_rule.has_value()) {
    throw SchemaError(
        "schema must set exactly one of domain_column or split_rule");
  }
  if (schema.label_column.empty()) throw SchemaError("schema has no label column");

  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + path + "' is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::unordered_map<std::string, std::size_t> header;
  {
    const auto names = split_record(line, schema.delimiter, 1);
    for (std::size_t i = 0; i < names.size(); ++i) header[trim(names[i])] = i;
  }

  const bool unknown_slot =
      schema.unknown_policy == UnknownCategoryPolicy::kUnknownSlot;
  std::vector<EncodedColumn> columns;
  std::vector<std::string> feature_names;
  std::size_t width = 0;
  for (const FeatureColumn& fc : schema.features) {
    EncodedColumn col;
    col.csv_index = column_index(header, fc.name, "feature");
    col.categorical = fc.kind == FeatureColumn::Kind::kCategorical;
    col.offset = width;
    if (col.categorical) {
      std::vector<std::string> tokens = fc.vocabulary;
      if (tokens.empty()) {
        if (fc.vocabulary_file.empty()) {
          throw SchemaError("categorical column '" + fc.name +
                            "' has no vocabulary");
        }
        std::filesystem::path vp(fc.vocabulary_file);
        if (vp.is_relative() && !schema.base_dir.empty()) {
          vp = std::filesystem::path(schema.base_dir) / vp;
        }
        tokens = read_vocabulary(vp.string());
      }
      for (const auto& t : tokens) {
        if (!col.vocab.emplace(t, col.vocab.size()).second) {
          throw SchemaError("duplicate token '" + t + "' in vocabulary of '" +
                            fc.name + "'");
        }
      }
      col.width = tokens.size() + (unknown_slot ? 1 : 0);
      for (const auto& t : tokens) feature_names.push_back(fc.name + "=" + t);
      if (unknown_slot) feature_names.push_back(fc.name + "=<unknown>");
    } else {
      col.width = 1;
      feature_names.push_back(fc.name);
    }
    width += col.width;
    columns.push_back(std::move(col));
  }

  const std::size_t label_idx = column_index(header, schema.label_column, "label");
  std::unordered_map<std::string, std::size_t> label_vocab;
  for (const auto& t : schema.label_vocabulary) {
    label_vocab.emplace(t, label_vocab.size());
  }
  const std::size_t num_classes = schema.label_vocabulary.empty()
                                      ? schema.num_classes
                                      : schema.label_vocabulary.size();
  if (num_classes == 0) {
    throw SchemaError("schema must declare label_vocabulary or num_classes");
  }

  std::size_t domain_idx = 0;
  if (schema.split_rule) {
    domain_idx = column_index(header, schema.split_rule->column, "domain");
  } else {
    domain_idx = column_index(header, schema.domain_column, "domain");
  }

  std::vector<DomainDataset> domains;
  std::unordered_map<std::string, std::size_t> domain_of_key;
  if (schema.split_rule) {
    domains.push_back({0, schema.split_rule->match_name, {}});
    domains.push_back({1, schema.split_rule->other_name, {}});
  } else {
    for (const auto& key : schema.domain_order) {
      domain_of_key.emplace(key, domains.size());
      domains.push_back({domains.size(), key, {}});
    }
  }
  const bool fixed_order = !schema.domain_order.empty();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, schema.delimiter, line_no);
    auto field = [&](std::size_t idx, const char* role) -> std::string {
      if (idx >= fields.size()) {
        throw SchemaError("line " + std::to_string(line_no) + ": missing " +
                          role + " field");
      }
      return trim(fields[idx]);
    };

    LabeledExample ex;
    ex.features.assign(width, 0.0);
    for (const EncodedColumn& col : columns) {
      const std::string v = field(col.csv_index, "feature");
      if (col.categorical) {
        auto it = col.vocab.find(v);
        if (it != col.vocab.end()) {
          ex.features[col.offset + it->second] = 1.0;
        } else if (unknown_slot) {
          ex.features[col.offset + col.width - 1] = 1.0;
        } else {
          throw SchemaError("line " + std::to_string(line_no) +
                            ": unseen category '" + v + "'");
        }
      } else {
        double d = 0.0;
        if (!parse_double(v, d)) {
          throw SchemaError("line " + std::to_string(line_no) +
                            ": non-numeric value '" + v + "'");
        }
        ex.features[col.offset] = d;
      }
    }

    const std::string label = field(label_idx, "label");
    if (label.empty()) {
      throw SchemaError("line " + std::to_string(line_no) + ": label is absent");
    }
    if (!label_vocab.empty()) {
      auto it = label_vocab.find(label);
      if (it == label_vocab.end()) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": unknown label '" + label + "'");
      }
      ex.label = it->second;
    } else {
      double d = 0.0;
      if (!parse_double(label, d) || d < 0 || d != std::floor(d) ||
          d >= static_cast<double>(num_classes)) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": unparseable label '" + label + "'");
      }
      ex.label = static_cast<std::size_t>(d);
    }

    const std::string key = field(domain_idx, "domain");
    std::size_t k = 0;
    if (schema.split_rule) {
      k = key == schema.split_rule->equals ? 0 : 1;
    } else {
      if (key.empty()) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": domain key is absent");
      }
      auto it = domain_of_key.find(key);
      if (it == domain_of_key.end()) {
        if (fixed_order) {
          throw SchemaError("line " + std::to_string(line_no) +
                            ": domain '" + key + "' not in domain_order");
        }
        it = domain_of_key.emplace(key, domains.size()).first;
        domains.push_back({domains.size(), key, {}});
      }
      k = it->second;
    }
    domains[k].examples.push_back(std::move(ex));
  }

  std::vector<std::string> class_names = schema.label_vocabulary;
  return FederatedDataset(std::move(domains), num_classes, width,
                          std::move(class_names), std::move(feature_names));
}

void write_csv(const FederatedDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < dataset.num_features(); ++j) out << 'f' << j << ',';
  out << "label,domain\n";
  out << std::setprecision(17);
  for (const DomainDataset& d : dataset.domains()) {
    for (const LabeledExample& e : d.examples) {
      for (double v : e.features) out << v << ',';
      out << e.label << ',' << d.name << '\n';
    }
  }
  if (!out) throw IoError("error writing '" + path + "'");
}

CsvSchema schema_for_written_csv(const FederatedDataset& dataset) {
  CsvSchema schema;
  for (std::size_t j = 0; j < dataset.num_features(); ++j) {
    FeatureColumn column;
    column.name = "f" + std::to_string(j);
    schema.features.push_back(std::move(column));
  }
  schema.label_column = "label";
  schema.num_classes = dataset.num_classes();
  schema.domain_column = "domain";
  schema.domain_order = dataset.domain_names();
  return schema;
}

// ---------------------------------------------------------------------------
// Splits and generators

TrainTestSplit stratified_split(const FederatedDataset& dataset,
                                double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  std::vector<DomainDataset> train, test;
  for (const DomainDataset& d : dataset.domains()) {
    if (d.size() < 2) {
      throw SchemaError("domain '" + d.name + "' too small to split");
    }
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(seed, d.id, RngPurpose::kSplit);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    }
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(d.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, d.size() - 1);
    DomainDataset tr{d.id, d.name, {}}, te{d.id, d.name, {}};
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_test ? te : tr).examples.push_back(d.examples[order[i]]);
    }
    train.push_back(std::move(tr));
    test.push_back(std::move(te));
  }
  return {FederatedDataset(std::move(train), dataset.num_classes(),
                           dataset.num_features(), dataset.class_names(),
                           dataset.feature_names()),
          FederatedDataset(std::move(test), dataset.num_classes(),
                           dataset.num_features(), dataset.class_names(),
                           dataset.feature_names())};
}

FederatedDataset synth_proposition1(std::size_t n_per_domain, bool allow_odd) {
  if (n_per_domain < 1) throw std::invalid_argument("n_per_domain must be >= 1");
  if (n_per_domain % 2 == 1 && !allow_odd) {
    throw std::invalid_argument(
        "n_per_domain must be even for balanced second domain (got " +
        std::to_string(n_per_domain) + "); pass allow_odd to override");
  }
  DomainDataset d1{0, "all_class_1", {}};
  DomainDataset d2{1, "balanced", {}};
  for (std::size_t i = 0; i < n_per_domain; ++i) {
    d1.examples.push_back({{1.0}, 1});
    d2.examples.push_back({{1.0}, i % 2});
  }
  return FederatedDataset({std::move(d1), std::move(d2)}, 2, 1, {"0", "1"},
                          {"x"});
}

FederatedDataset synth_gaussian_domains(const GaussianSynthParams& params,
                                        std::uint64_t seed) {
  if (params.domains.empty()) throw std::invalid_argument("no domains given");
  if (params.num_classes < 2) throw std::invalid_argument("need >= 2 classes");
  const std::size_t d = params.domains.front().mean.size();
  const std::size_t c = params.num_classes;
  std::vector<double> weights = params.class_weights;
  if (weights.empty()) {
    RngStream rng(seed, 0, RngPurpose::kSynth);
    weights.resize(c * d);
    for (double& w : weights) w = rng.normal();
  }
  if (weights.size() != c * d) {
    throw std::invalid_argument("class_weights must be num_classes x d_feat");
  }

  std::vector<DomainDataset> domains;
  for (std::size_t k = 0; k < params.domains.size(); ++k) {
    const GaussianDomainSpec& ds = params.domains[k];
    if (ds.count < 1) throw std::invalid_argument("domain count must be >= 1");
    if (!(ds.covariance_scale > 0.0)) {
      throw std::invalid_argument("covariance_scale must be positive");
    }
    if (ds.mean.size() != d) throw std::invalid_argument("mean dimension mismatch");
    if (!ds.class_offsets.empty() && ds.class_offsets.size() != c) {
      throw std::invalid_argument("class_offsets must have num_classes entries");
    }
    RngStream rng(seed, k + 1, RngPurpose::kSynth);
    const double sd = std::sqrt(ds.covariance_scale);
    DomainDataset dom{k, "domain" + std::to_string(k), {}};
    std::vector<double> scores(c);
    for (std::size_t i = 0; i < ds.count; ++i) {
      LabeledExample ex;
      ex.features.resize(d);
      for (std::size_t j = 0; j < d; ++j) ex.features[j] = ds.mean[j] + sd * rng.normal();
      double top = -INFINITY;
      for (std::size_t y = 0; y < c; ++y) {
        double s = ds.class_offsets.empty() ? 0.0 : ds.class_offsets[y];
        for (std::size_t j = 0; j < d; ++j) s += weights[y * d + j] * ex.features[j];
        scores[y] = s;
        top = std::max(top, s);
      }
      double total = 0.0;
      for (double& s : scores) total += (s = std::exp(s - top));
      double u = rng.uniform01() * total;
      std::size_t label = c - 1;
      for (std::size_t y = 0; y < c; ++y) {
        if (u < scores[y]) {
          label = y;
          break;
        }
        u -= scores[y];
      }
      ex.label = label;
      dom.examples.push_back(std::move(ex));
    }
    domains.push_back(std::move(dom));
  }
  return FederatedDataset(std::move(domains), c, d);
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw IoError("truncated IDX header in '" + path + "'");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

}  // namespace

FederatedDataset load_idx_classes(const std::string& images_path,
                                  const std::string& labels_path,
                                  const std::vector<std::size_t>& classes,
                                  const std::vector<std::string>& class_names) {
  if (classes.empty()) throw SchemaError("no classes selected");
  if (class_names.size() != classes.size()) {
    throw SchemaError("one name per selected class is required");
  }
  std::ifstream images(images_path, std::ios::binary);
  if (!images) throw IoError("cannot open '" + images_path + "'");
  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw IoError("cannot open '" + labels_path + "'");
  if (read_be32(images, images_path) != 0x00000803) {
    throw IoError("'" + images_path + "' is not an IDX image file");
  }
  if (read_be32(labels, labels_path) != 0x00000801) {
    throw IoError("'" + labels_path + "' is not an IDX label file");
  }
  const std::uint32_t n = read_be32(images, images_path);
  const std::uint32_t rows = read_be32(images, images_path);
  const std::uint32_t cols = read_be32(images, images_path);
  if (read_be32(labels, labels_path) != n) {
    throw IoError("image and label counts differ");
  }
  const std::size_t d = std::size_t{rows} * cols;
  std::vector<DomainDataset> domains(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) domains[c].name = class_names[c];
  std::vector<unsigned char> pixels(d);
  for (std::uint32_t i = 0; i < n; ++i) {
    char label = 0;
    if (!images.read(reinterpret_cast<char*>(pixels.data()),
                     static_cast<std::streamsize>(d)) ||
        !labels.get(label)) {
      throw IoError("truncated IDX data");
    }
    const auto it = std::find(classes.begin(), classes.end(),
                              static_cast<unsigned char>(label));
    if (it == classes.end()) continue;
    const auto c = static_cast<std::size_t>(it - classes.begin());
    LabeledExample ex;
    ex.features.resize(d);
    for (std::size_t j = 0; j < d; ++j) ex.features[j] = pixels[j] / 255.0;
    ex.label = c;
    domains[c].examples.push_back(std::move(ex));
  }
  return FederatedDataset(std::move(domains), classes.size(), d, class_names);
}

}  // namespace afl
