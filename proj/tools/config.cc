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

#include "config.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "afl/errors.h"
#include "afl/model.h"
#include "afl/sampling.h"

namespace afl::cli {
namespace {

namespace fs = std::filesystem;

const std::set<std::string> kSections = {"dataset", "model", "optimizer",
                                         "bounds",  "eval",  "output", "seed"};

const Json& section(const RunConfig& c, const std::string& name) {
  static const Json empty = Json::object();
  const auto it = c.doc.find(name);
  if (it == c.doc.end()) return empty;
  if (!it->is_object()) throw ConfigError("section '" + name + "' must be an object");
  return *it;
}

void check_keys(const Json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get(const Json& j, const std::string& key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> get_optional(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

std::string require_file(const RunConfig& c, const Json& j, const std::string& key) {
  const auto value = get_optional<std::string>(j, key);
  if (!value || value->empty()) throw ConfigError("dataset." + key + " is required");
  const std::string path = resolve_path(c, *value);
  if (!fs::exists(path)) throw ConfigError("dataset file not found: " + path);
  return path;
}

FederatedDataset load_table(const RunConfig& c, const std::string& path,
                            std::size_t num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  CsvSchema schema;
  std::stringstream ss(header);
  std::string col;
  while (std::getline(ss, col, ',')) {
    if (!col.empty() && col.back() == '\r') col.pop_back();
    if (col.size() > 1 && col[0] == 'f') {
      FeatureColumn f;
      f.name = col;
      schema.features.push_back(std::move(f));
    }
  }
  schema.label_column = "label";
  schema.domain_column = "domain";
  schema.num_classes = num_classes;
  schema.base_dir = c.base_dir;
  return load_csv(path, schema);
}

GaussianSynthParams parse_gaussian(const Json& j) {
  GaussianSynthParams params;
  params.num_classes = get<std::size_t>(j, "num_classes", 2);
  params.class_weights = get<std::vector<double>>(j, "class_weights", {});
  const auto it = j.find("domains");
  if (it == j.end() || !it->is_array() || it->empty()) {
    throw ConfigError("gaussian dataset needs a non-empty 'domains' list");
  }
  for (const auto& d : *it) {
    check_keys(d, "gaussian domain", {"mean", "covariance_scale", "class_offsets", "count"});
    GaussianDomainSpec g;
    g.mean = get<std::vector<double>>(d, "mean", {});
    g.covariance_scale = get<double>(d, "covariance_scale", 1.0);
    g.class_offsets = get<std::vector<double>>(d, "class_offsets", {});
    g.count = get<std::size_t>(d, "count", 0);
    params.domains.push_back(std::move(g));
  }
  return params;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  try {
    c.doc = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!c.doc.is_object()) throw ConfigError("config root must be an object");
  check_keys(c.doc, "config", kSections);
  c.base_dir = fs::absolute(path).parent_path().string();
  return c;
}

void set_value(RunConfig& c, const std::string& sec, const std::string& key,
               Json value) {
  if (!c.doc.contains(sec) || !c.doc[sec].is_object()) c.doc[sec] = Json::object();
  c.doc[sec][key] = std::move(value);
}

std::string config_hash(const RunConfig& c) {
  Json doc = c.doc;
  if (doc.is_object()) doc.erase("output");
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string resolve_path(const RunConfig& c, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(c.base_dir) / p).lexically_normal().string();
}

std::uint64_t run_seed(const RunConfig& c) {
  return get<std::uint64_t>(c.doc, "seed", 1);
}

CsvSchema build_csv_schema(const RunConfig& c) {
  const Json& d = section(c, "dataset");
  CsvSchema schema;
  schema.base_dir = c.base_dir;
  const auto features = d.find("features");
  if (features == d.end() || !features->is_array() || features->empty()) {
    throw ConfigError("dataset.features must list at least one column");
  }
  for (const auto& f : *features) {
    FeatureColumn col;
    if (f.is_string()) {
      col.name = f.get<std::string>();
    } else {
      check_keys(f, "feature", {"name", "kind", "vocabulary", "vocabulary_file"});
      col.name = get<std::string>(f, "name", "");
      const auto kind = get<std::string>(f, "kind", "numeric");
      if (kind == "categorical") {
        col.kind = FeatureColumn::Kind::kCategorical;
      } else if (kind != "numeric") {
        throw ConfigError("feature kind must be numeric or categorical");
      }
      col.vocabulary = get<std::vector<std::string>>(f, "vocabulary", {});
      col.vocabulary_file = get<std::string>(f, "vocabulary_file", "");
    }
    if (col.name.empty()) throw ConfigError("feature without a name");
    schema.features.push_back(std::move(col));
  }
  schema.label_column = get<std::string>(d, "label_column", "");
  if (schema.label_column.empty()) throw ConfigError("dataset.label_column is required");
  schema.label_vocabulary = get<std::vector<std::string>>(d, "label_vocabulary", {});
  schema.num_classes = get<std::size_t>(d, "num_classes", schema.label_vocabulary.size());
  schema.domain_column = get<std::string>(d, "domain_column", "");
  schema.domain_order = get<std::vector<std::string>>(d, "domain_order", {});
  if (const auto split = d.find("split"); split != d.end()) {
    check_keys(*split, "dataset.split", {"column", "equals", "match_name", "other_name"});
    DomainSplitRule rule;
    rule.column = get<std::string>(*split, "column", "");
    rule.equals = get<std::string>(*split, "equals", "");
    rule.match_name = get<std::string>(*split, "match_name", rule.match_name);
    rule.other_name = get<std::string>(*split, "other_name", rule.other_name);
    schema.split_rule = rule;
  }
  if (schema.domain_column.empty() == !schema.split_rule) {
    throw ConfigError("set exactly one of dataset.domain_column and dataset.split");
  }
  const auto delim = get<std::string>(d, "delimiter", ",");
  if (delim.size() != 1) throw ConfigError("delimiter must be one character");
  schema.delimiter = delim[0];
  const auto unknown = get<std::string>(d, "unknown_category", "error");
  if (unknown == "unknown_slot") {
    schema.unknown_policy = UnknownCategoryPolicy::kUnknownSlot;
  } else if (unknown != "error") {
    throw ConfigError("unknown_category must be error or unknown_slot");
  }
  return schema;
}

Datasets build_datasets(const RunConfig& c) {
  const Json& d = section(c, "dataset");
  check_keys(d, "dataset",
             {"kind", "train", "test", "test_fraction", "split_seed", "features",
              "label_column", "label_vocabulary", "num_classes", "domain_column",
              "domain_order", "split", "delimiter", "unknown_category",
              "n_per_domain", "domains", "class_weights", "synth_seed",
              "images", "labels", "test_images", "test_labels", "classes",
              "class_names"});
  const auto kind = get<std::string>(d, "kind", "csv");
  const double test_fraction = get<double>(d, "test_fraction", 0.0);
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must be in [0, 1)");
  }
  std::optional<FederatedDataset> train, test;
  if (kind == "csv") {
    const CsvSchema schema = build_csv_schema(c);
    train.emplace(load_csv(require_file(c, d, "train"), schema));
    if (d.contains("test")) test.emplace(load_csv(require_file(c, d, "test"), schema));
  } else if (kind == "table") {
    const auto classes = get<std::size_t>(d, "num_classes", 2);
    train.emplace(load_table(c, require_file(c, d, "train"), classes));
    if (d.contains("test")) {
      test.emplace(load_table(c, require_file(c, d, "test"), classes));
    }
  } else if (kind == "prop1") {
    train.emplace(synth_proposition1(get<std::size_t>(d, "n_per_domain", 100)));
  } else if (kind == "gaussian") {
    train.emplace(synth_gaussian_domains(parse_gaussian(d),
                                         get<std::uint64_t>(d, "synth_seed", 1)));
  } else if (kind == "idx") {
    const auto classes = get<std::vector<std::size_t>>(d, "classes", {0, 2, 6});
    const auto names = get<std::vector<std::string>>(
        d, "class_names", {"t-shirt/top", "pullover", "shirt"});
    train.emplace(load_idx_classes(require_file(c, d, "images"),
                                   require_file(c, d, "labels"), classes, names));
    if (d.contains("test_images")) {
      test.emplace(load_idx_classes(require_file(c, d, "test_images"),
                                    require_file(c, d, "test_labels"), classes,
                                    names));
    }
  } else {
    throw ConfigError("dataset.kind must be csv, table, prop1, gaussian or idx");
  }
  if (!test && test_fraction > 0.0) {
    TrainTestSplit split = stratified_split(
        *train, test_fraction, get<std::uint64_t>(d, "split_seed", 1));
    return {std::move(split.train), std::move(split.test)};
  }
  return {std::move(*train), std::move(test)};
}

LambdaDomain parse_lambda_domain(const Json& value,
                                 const std::vector<double>& m_bar) {
  if (value.is_null() || (value.is_string() && value == "simplex")) {
    return LambdaDomain::full_simplex(m_bar.size());
  }
  if (value.is_string() && value == "mbar") {
    return LambdaDomain::finite_hull({MixtureWeights(m_bar)});
  }
  if (value.is_object() && value.contains("vertices")) {
    std::vector<MixtureWeights> vertices;
    try {
      for (const auto& v : value["vertices"]) {
        vertices.emplace_back(v.get<std::vector<double>>());
      }
      return LambdaDomain::finite_hull(std::move(vertices));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("bad lambda vertices: ") + e.what());
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("bad lambda vertices: ") + e.what());
    }
  }
  throw ConfigError("lambda_domain must be simplex, mbar or {\"vertices\": [...]}");
}

TrainConfig build_train_config(const RunConfig& c, const FederatedDataset& train) {
  const Json& o = section(c, "optimizer");
  const Json& m = section(c, "model");
  check_keys(o, "optimizer",
             {"iterations", "step_w", "step_lambda", "sampler", "batch", "gamma",
              "mu", "lambda_domain", "pilot_draws", "loss_bound", "log_interval",
              "update_rule"});
  check_keys(m, "model", {"radius"});
  TrainConfig t;
  t.iterations = get<std::size_t>(o, "iterations", t.iterations);
  t.step_w = get_optional<double>(o, "step_w");
  t.step_lambda = get_optional<double>(o, "step_lambda");
  try {
    t.sampler = parse_sampler_kind(get<std::string>(o, "sampler", "perdomain"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  t.batch = get<std::size_t>(o, "batch", t.batch);
  t.gamma = get<double>(o, "gamma", t.gamma);
  t.mu = get<double>(o, "mu", t.mu);
  t.radius = get<double>(m, "radius", t.radius);
  if (o.contains("lambda_domain")) {
    t.lambda_domain = parse_lambda_domain(o["lambda_domain"],
                                          train.empirical_proportions());
  }
  t.seed = run_seed(c);
  t.pilot_draws = get<std::size_t>(o, "pilot_draws", t.pilot_draws);
  t.loss_bound = get_optional<double>(o, "loss_bound");
  t.log_interval = get<std::size_t>(o, "log_interval", t.log_interval);
  const auto rule = get<std::string>(o, "update_rule", "sgd");
  if (rule == "adagrad") {
    t.update_rule = UpdateRule::kAdagrad;
  } else if (rule != "sgd") {
    throw ConfigError("update_rule must be sgd or adagrad");
  }
  return t;
}

BoundInputs build_bound_inputs(const RunConfig& c, const FederatedDataset* train) {
  const Json& b = section(c, "bounds");
  check_keys(b, "bounds",
             {"domain_sizes", "lambda_domain", "loss_bound", "vc_dimension", "delta",
              "epsilon", "l1_distance", "rademacher", "lambda", "empirical_loss",
              "variant"});
  BoundInputs in;
  in.domain_sizes = get<std::vector<std::size_t>>(b, "domain_sizes", {});
  if (in.domain_sizes.empty() && train) in.domain_sizes = train->domain_sizes();
  if (in.domain_sizes.empty()) throw ConfigError("bounds.domain_sizes is required");
  for (auto mk : in.domain_sizes) {
    if (mk == 0) throw ConfigError("bounds.domain_sizes entries must be >= 1");
  }
  if (b.contains("lambda_domain")) {
    in.lambda_domain = parse_lambda_domain(b["lambda_domain"], in.proportions());
  }
  in.loss_bound = get<double>(b, "loss_bound", floor_loss_bound());
  in.vc_dimension = get_optional<std::size_t>(b, "vc_dimension");
  in.delta = get<double>(b, "delta", in.delta);
  in.epsilon = get<double>(b, "epsilon", in.epsilon);
  in.l1_distance = get_optional<double>(b, "l1_distance");
  in.rademacher = get<std::vector<double>>(b, "rademacher", {});
  in.lambda = get_optional<std::vector<double>>(b, "lambda");
  in.validate();
  return in;
}

}  // namespace afl::cli
