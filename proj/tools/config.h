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

// Run configuration: a JSON document with dataset, model, optimizer, bounds,
// eval and output sections. Command-line flags are applied on top of the
// file before anything is built from it.

#ifndef AFL_TOOLS_CONFIG_H_
#define AFL_TOOLS_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "afl/bounds.h"
#include "afl/data.h"
#include "afl/objective.h"
#include "afl/optimizer.h"

namespace afl::cli {

using Json = nlohmann::json;

struct RunConfig {
  Json doc = Json::object();
  // Relative paths in the document resolve against this directory.
  std::string base_dir = ".";
};

// An empty path gives an empty document rooted at the working directory.
RunConfig load_config(const std::string& path);

// Sets doc[section][key] = value.
void set_value(RunConfig& config, const std::string& section,
               const std::string& key, Json value);

// FNV-1a (64-bit) of the canonical dump without the output section, as 16
// hex digits.
std::string config_hash(const RunConfig& config);

struct Datasets {
  FederatedDataset train;
  // Held-out data: the configured test file, a stratified split, or nullopt.
  std::optional<FederatedDataset> test;

  const FederatedDataset& evaluation() const { return test ? *test : train; }
};

Datasets build_datasets(const RunConfig& config);

// CSV schema from the dataset section (csv kind only).
CsvSchema build_csv_schema(const RunConfig& config);

// Parses "simplex", "mbar" or {"vertices": [[...], ...]}.
LambdaDomain parse_lambda_domain(const Json& value,
                                 const std::vector<double>& m_bar);

TrainConfig build_train_config(const RunConfig& config,
                               const FederatedDataset& train);

std::uint64_t run_seed(const RunConfig& config);

// bounds section; domain sizes come from `train` when the section omits them.
BoundInputs build_bound_inputs(const RunConfig& config,
                               const FederatedDataset* train);

std::string resolve_path(const RunConfig& config, const std::string& path);

}  // namespace afl::cli

#endif  // AFL_TOOLS_CONFIG_H_
