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

// Subcommand implementations. Each returns the process exit code and throws
// afl errors, which main maps to exit codes.

#ifndef AFL_TOOLS_COMMANDS_H_
#define AFL_TOOLS_COMMANDS_H_

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace afl::cli {

struct TrainArgs {
  std::string config;
  std::string mode = "afl";  // afl | optimistic | uniform | domain-K | all
  std::string dataset;       // "prop1" or a table CSV written by synth
  std::size_t seeds = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::optional<std::string> sampler;
  std::optional<double> step_w;
  std::optional<double> step_lambda;
  std::optional<double> radius;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> log_interval;
  std::string aggregate;  // test | train
  std::string out_dir;
};

struct EvalArgs {
  std::string config;
  std::string model;
  std::string data;
  std::size_t num_classes = 2;
  std::string protected_column;
  std::string aggregate;
  std::string out;
};

struct BoundArgs {
  std::string config;
  std::vector<std::size_t> domain_sizes;
  std::optional<std::size_t> vc_dimension;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<double> loss_bound;
  std::optional<double> l1_distance;
  std::optional<double> empirical_loss;
  std::vector<double> lambda;
  std::vector<double> rademacher;
  std::string lambda_domain;
  std::string variant;  // max | per_lambda | corollary | perdomain | all
  std::string format = "both";
};

struct SynthArgs {
  std::string generator;  // prop1 | gaussian
  std::size_t n = 100;
  bool allow_odd = false;
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_train(const TrainArgs& args, std::ostream& out);
int cmd_eval(const EvalArgs& args, std::ostream& out);
int cmd_bound(const BoundArgs& args, std::ostream& out);
int cmd_synth(const SynthArgs& args, std::ostream& out);
int cmd_project(const std::string& vector, const std::string& lambda_domain,
                std::ostream& out);
int cmd_oracle(const std::string& what, const std::string& argument,
               double resolution, std::ostream& out);

// Comma-separated reals.
std::vector<double> parse_vector(const std::string& text);
std::string format_vector(const std::vector<double>& v);

}  // namespace afl::cli

#endif  // AFL_TOOLS_COMMANDS_H_
