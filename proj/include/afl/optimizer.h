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

// Projected stochastic descent-ascent for min_w max_lambda L(w, lambda).
//
// Two layers:
//   * descent_ascent / optimistic_descent_ascent run the generic iteration on
//     any SaddleProblem (gradient oracle + two projections);
//   * stochastic_afl, optimistic_afl and the baselines bind that engine to
//     the affine-softmax model, the samplers and the lambda domain.

#ifndef AFL_OPTIMIZER_H_
#define AFL_OPTIMIZER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afl/data.h"
#include "afl/model.h"
#include "afl/objective.h"
#include "afl/sampling.h"

namespace afl {

// ---------------------------------------------------------------------------
// Generic engine

struct SaddleGradients {
  std::vector<double> w;       // descent direction estimate for w
  std::vector<double> coords;  // ascent direction estimate for the adversary
};

struct SaddleProblem {
  // Gradient estimates at (w, coords); `step` is the 1-based iteration index
  // and keys the random streams of stochastic oracles.
  std::function<SaddleGradients(std::span<const double> w,
                                std::span<const double> coords,
                                std::size_t step)>
      gradients;
  std::function<void(std::span<double>)> project_w;
  std::function<void(std::span<double>)> project_coords;
};

enum class UpdateRule {
  kSgd,
  // Per-coordinate Adagrad scaling of the w step. Not covered by the
  // convergence guarantee; offered for experimentation only.
  kAdagrad,
};

struct SaddleRunOptions {
  std::size_t iterations = 1;
  double step_w = 0.0;
  double step_coords = 0.0;
  // When false the adversary stays at its initial point.
  bool update_coords = true;
  UpdateRule update_rule = UpdateRule::kSgd;
  // Called after every iteration t = 1..T with the new iterates.
  std::function<void(std::size_t t, std::span<const double> w,
                     std::span<const double> coords,
                     const SaddleGradients& g)>
      observer;
};

struct SaddleRun {
  std::vector<double> w_avg;
  std::vector<double> coords_avg;
  std::vector<double> w_final;
  std::vector<double> coords_final;
};

// w_t = P_W(w_{t-1} - s_w g_w(t-1)),  c_t = P_C(c_{t-1} + s_c g_c(t-1));
// averages are over the T new iterates. Throws NumericError on non-finite
// iterates.
SaddleRun descent_ascent(const SaddleProblem& problem, std::vector<double> w0,
                         std::vector<double> coords0,
                         const SaddleRunOptions& options);

// w_t = P_W(w_{t-1} - 2 s_w g_w(t-1) + s_w g_w(max(t-2, 0))) and the mirrored
// ascent update. The lookback gradient is the estimate obtained at the
// previous iteration (the current one at t = 1), so each step costs one
// oracle call.
SaddleRun optimistic_descent_ascent(const SaddleProblem& problem,
                                    std::vector<double> w0,
                                    std::vector<double> coords0,
                                    const SaddleRunOptions& options);

// ---------------------------------------------------------------------------
// Agnostic training

struct TrainConfig {
  std::size_t iterations = 1000;
  // nullopt selects the step sizes from the pilot estimates.
  std::optional<double> step_w;
  std::optional<double> step_lambda;
  SamplerKind sampler = SamplerKind::kPerDomain;
  std::size_t batch = 1;
  double gamma = 0.0;  // ||w|| penalty
  double mu = 0.0;     // chi-squared penalty
  double radius = 10.0;
  // Defaults to the full simplex over the dataset's domains.
  std::optional<LambdaDomain> lambda_domain;
  std::uint64_t seed = 1;
  std::size_t pilot_draws = 200;
  // Loss bound M used in the crude gradient bound; defaults to
  // loss_bound_for_ball for the configured radius.
  std::optional<double> loss_bound;
  // Trajectory every `log_interval` iterations (0: only the last one).
  std::size_t log_interval = 0;
  UpdateRule update_rule = UpdateRule::kSgd;
  // Optional hook on every iterate (tests use it to check feasibility).
  std::function<void(std::size_t t, const ModelParams& w,
                     const MixtureWeights& lambda)>
      observer;
};

struct TrajectoryRecord {
  std::size_t t = 0;
  double mixture_loss = 0.0;
  double agnostic_loss = 0.0;
  std::vector<double> lambda;
  double grad_norm_w = 0.0;
  double grad_norm_lambda = 0.0;
  double step_w = 0.0;
  double step_lambda = 0.0;
};

// Quantities behind the automatic step sizes, all at (w_0, lambda_0).
struct StepSizeEstimate {
  double sigma2_w = 0.0;
  double grad_bound_w = 0.0;
  double sigma2_lambda = 0.0;
  double grad_bound_lambda = 0.0;
  double radius_w = 0.0;
  double radius_lambda = 0.0;
  double step_w = 0.0;
  double step_lambda = 0.0;
};

struct TrainResult {
  std::string algorithm;
  ModelParams w_avg;
  MixtureWeights lambda_avg;
  ModelParams w_final;
  MixtureWeights lambda_final;
  std::vector<double> coords_avg;
  std::vector<double> coords_final;
  StepSizeEstimate steps;
  std::vector<TrajectoryRecord> trajectory;
  double wall_clock_seconds = 0.0;

  // The model the algorithm reports: w_avg for Stochastic-AFL and the
  // baselines, w_final for the optimistic variant.
  const ModelParams& output_model() const {
    return algorithm == "optimistic_afl" ? w_final : w_avg;
  }
  const MixtureWeights& output_lambda() const {
    return algorithm == "optimistic_afl" ? lambda_final : lambda_avg;
  }
};

// Pilot estimates and step sizes
//   s_w = 2 R_W / sqrt(T (sigma_w^2 + G_w^2)),
//   s_l = 2 R_L / sqrt(T (sigma_l^2 + G_l^2)).
// sigma^2 are pilot Monte-Carlo variances at (w_0, lambda_0); G is the larger
// of the pilot gradient norm and the analytic bound (sqrt(2) max ||(x,1)||
// for w, sqrt(p) M for lambda). Explicit step sizes in `config` override.
StepSizeEstimate estimate_step_sizes(const TrainConfig& config,
                                     const FederatedDataset& dataset,
                                     bool update_lambda = true);

// Projected stochastic descent on w and ascent on lambda with averaged
// output. w_0 = 0; lambda_0 = m_bar on the full simplex, uniform vertex
// weights on a hull.
TrainResult stochastic_afl(const TrainConfig& config,
                           const FederatedDataset& dataset);

// Optimistic variant; reports the final iterates.
TrainResult optimistic_afl(const TrainConfig& config,
                           const FederatedDataset& dataset);

// Projected SGD on the size-weighted mixture (lambda frozen at m_bar).
TrainResult uniform_baseline(const TrainConfig& config,
                             const FederatedDataset& dataset);

// Projected SGD on domain k alone (lambda frozen at the Dirac on k).
TrainResult single_domain_baseline(const TrainConfig& config,
                                   const FederatedDataset& dataset,
                                   std::size_t k);

}  // namespace afl

#endif  // AFL_OPTIMIZER_H_
