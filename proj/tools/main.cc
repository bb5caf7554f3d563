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

// afl: train, evaluate and analyse agnostic federated models.
//
// Exit codes: 0 success, 2 configuration or schema error, 3 numeric
// divergence, 4 I/O failure.

#include <cstdlib>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "afl/errors.h"
#include "commands.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace afl::cli;
  CLI::App app{"Agnostic federated learning: minimax training over domain mixtures"};
  app.require_subcommand(1);
  app.footer(
      "Environment: AFL_NUM_THREADS sets the worker count for gradient\n"
      "evaluation (results do not depend on it).");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train AFL and/or baseline models");
  t->add_option("--config", train.config, "JSON run configuration");
  t->add_option("--mode", train.mode, "afl | optimistic | uniform | domain-K | all")
      ->capture_default_str();
  t->add_option("--dataset", train.dataset,
                "prop1, or a CSV written by `afl synth` (overrides the config)");
  t->add_option("--seeds", train.seeds, "Number of consecutive seeds to run")
      ->capture_default_str();
  t->add_option("--seed", train.seed, "First seed (config: seed)");
  t->add_option("--iterations", train.iterations, "Iterations T");
  t->add_option("--sampler", train.sampler, "perdomain | weighted | k_weighted");
  t->add_option("--step-w", train.step_w, "Fixed w step size (default: automatic)");
  t->add_option("--step-lambda", train.step_lambda,
                "Fixed lambda step size (default: automatic)");
  t->add_option("--radius", train.radius, "Radius of the weight ball");
  t->add_option("--batch", train.batch, "Samples per gradient estimate");
  t->add_option("--log-interval", train.log_interval,
                "Trajectory record every N iterations (0: last only)");
  t->add_option("--aggregate", train.aggregate,
                "Weights of the U column: test (default) or train proportions");
  t->add_option("--out", train.out_dir, "Output directory (config: output.dir)");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a saved model per domain");
  e->add_option("--model", eval.model, "Model file written by train")->required();
  e->add_option("--config", eval.config, "Run configuration describing the data");
  e->add_option("--data", eval.data, "Test CSV (config schema, or synth format)");
  e->add_option("--protected-column", eval.protected_column,
                "Report loss per value of this CSV column");
  e->add_option("--aggregate", eval.aggregate, "test | train");
  e->add_option("--out", eval.out, "Write metrics JSON here");

  BoundArgs bound;
  auto* b = app.add_subcommand("bound", "Evaluate generalization bounds");
  b->add_option("--config", bound.config, "Configuration with a bounds section");
  b->add_option("--sizes", bound.domain_sizes, "Domain sizes m_k")->delimiter(',');
  b->add_option("--vc-dimension", bound.vc_dimension, "VC dimension d");
  b->add_option("--delta", bound.delta, "Confidence parameter in (0, 1)");
  b->add_option("--epsilon", bound.epsilon, "Cover radius");
  b->add_option("--loss-bound", bound.loss_bound, "Loss bound M");
  b->add_option("--l1", bound.l1_distance, "l1 distance to the mixture set");
  b->add_option("--empirical-loss", bound.empirical_loss, "Empirical loss");
  b->add_option("--lambda", bound.lambda, "Mixture for per-lambda variants")
      ->delimiter(',');
  b->add_option("--rademacher", bound.rademacher, "Per-domain Rademacher values")
      ->delimiter(',');
  b->add_option("--lambda-domain", bound.lambda_domain,
                "simplex | mbar | {\"vertices\": [[...]]}");
  b->add_option("--variant", bound.variant,
                "max | per_lambda | corollary | perdomain | all");
  b->add_option("--format", bound.format, "json | text | both")->capture_default_str();

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  s->add_option("generator", synth.generator, "prop1 | gaussian")->required();
  s->add_option("--n", synth.n, "Examples per domain (prop1)")->capture_default_str();
  s->add_flag("--allow-odd", synth.allow_odd, "Accept odd n for prop1");
  s->add_option("--config", synth.config, "Configuration with the gaussian params");
  s->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  s->add_option("--out", synth.out, "Output CSV")->required();

  std::string vector, lambda_domain;
  auto* p = app.add_subcommand("project", "Project a vector onto the simplex");
  p->add_option("vector", vector, "Comma-separated values")->required();
  p->add_option("--lambda-domain", lambda_domain,
                "JSON vertex set; the vector is then in vertex coordinates");

  std::string oracle_what, oracle_arg;
  double resolution = 1e-3;
  auto* o = app.add_subcommand("oracle", "");  // hidden: brute-force references
  o->group("");
  o->add_option("what", oracle_what, "prop1 | project | minimax")->required();
  o->add_option("argument", oracle_arg, "vector or table CSV");
  o->add_option("--resolution", resolution, "Grid step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitConfig;
  }

  try {
    if (*t) return cmd_train(train, std::cout);
    if (*e) return cmd_eval(eval, std::cout);
    if (*b) return cmd_bound(bound, std::cout);
    if (*s) return cmd_synth(synth, std::cout);
    if (*p) return cmd_project(vector, lambda_domain, std::cout);
    if (*o) return cmd_oracle(oracle_what, oracle_arg, resolution, std::cout);
  } catch (const afl::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const afl::IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kExitIo;
  } catch (const afl::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const afl::SchemaError& err) {
    std::cerr << "schema error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& err) {
    std::cerr << "invalid argument: " << err.what() << "\n";
    return kExitConfig;
  }
  return EXIT_FAILURE;
}
