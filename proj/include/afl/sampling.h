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

// Unbiased stochastic gradients of L(w, lambda) = sum_k lambda_k L_k(w).
//
// lambda:      pick K uniformly in [p], I uniformly in [m_K]; the estimate
//              is p * loss(K, I) in coordinate K and zero elsewhere.
// PerDomain:   one uniform example J_k per domain; sum_k lambda_k grad(k, J_k).
// Weighted:    K ~ lambda, J uniform in [m_K]; grad(K, J).
// KWeighted:   mean of p independent Weighted draws.
//
// Every sampler takes a batch size b and averages b independent draws.

#ifndef AFL_SAMPLING_H_
#define AFL_SAMPLING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "afl/data.h"
#include "afl/model.h"
#include "afl/rng.h"

namespace afl {

enum class SamplerKind { kLambdaUniform, kPerDomain, kWeighted, kKWeighted };

std::string to_string(SamplerKind kind);
// Accepts "lambda", "perdomain", "weighted", "k_weighted".
SamplerKind parse_sampler_kind(const std::string& name);

struct DrawnIndex {
  std::size_t domain;
  std::size_t example;
  friend bool operator==(const DrawnIndex&, const DrawnIndex&) = default;
};

struct GradientEstimate {
  std::vector<double> value;
  SamplerKind sampler;
  std::vector<DrawnIndex> drawn;
  std::uint64_t rng_tag = 0;
};

// Exact lambda-gradient: (L_1(w), ..., L_p(w)). Independent of lambda.
std::vector<double> lambda_grad_full(const ModelParams& w,
                                     const FederatedDataset& dataset);

// Exact w-gradient sum_k lambda_k grad L_k(w).
std::vector<double> weight_grad_full(const ModelParams& w,
                                     std::span<const double> lambda,
                                     const FederatedDataset& dataset);

GradientEstimate lambda_grad_stochastic(const ModelParams& w,
                                        const FederatedDataset& dataset,
                                        RngStream& rng, std::size_t batch = 1);

GradientEstimate perdomain_grad(const ModelParams& w,
                                std::span<const double> lambda,
                                const FederatedDataset& dataset, RngStream& rng,
                                std::size_t batch = 1);

// Throws std::invalid_argument if lambda has a negative entry.
GradientEstimate weighted_grad(const ModelParams& w,
                               std::span<const double> lambda,
                               const FederatedDataset& dataset, RngStream& rng,
                               std::size_t batch = 1);

GradientEstimate k_weighted_grad(const ModelParams& w,
                                 std::span<const double> lambda,
                                 const FederatedDataset& dataset,
                                 RngStream& rng, std::size_t batch = 1);

// Dispatches one of the three w-samplers.
GradientEstimate weight_grad_stochastic(SamplerKind kind, const ModelParams& w,
                                        std::span<const double> lambda,
                                        const FederatedDataset& dataset,
                                        RngStream& rng, std::size_t batch = 1);

// K ~ lambda by inverse CDF over the running sum. u in [0, 1); a draw that
// lands exactly on a boundary goes to the upper index, and zero-weight
// domains are never selected.
std::size_t sample_from_mixture(std::span<const double> lambda, double u);

// Derivative of the chi-squared penalty added to the lambda ascent
// direction: entry k is -2 mu lambda_k / m_bar_k. The exact derivative of
// -mu chi2 differs from this by the constant 2 mu in every entry, which the
// simplex projection removes.
std::vector<double> reg_lambda_grad_term(std::span<const double> lambda,
                                         std::span<const double> m_bar,
                                         double mu);

struct SamplerStats {
  std::vector<double> mean;
  // Unbiased per-coordinate variance.
  std::vector<double> coordinate_variance;
  // Trace of the covariance, E||delta - E delta||^2.
  double trace_variance = 0.0;
  std::size_t draws = 0;

  // Standard error of the mean in coordinate j.
  double standard_error(std::size_t j) const;
  // Standard error of trace_variance, from the spread of ||delta - mean||^2.
  double trace_variance_standard_error = 0.0;
};

// Sample mean and variance over n_draws independent calls of `draw`. Draw i
// uses the stream (seed, i, kPilot).
SamplerStats estimate_sampler_stats(
    const std::function<std::vector<double>(RngStream&)>& draw,
    std::size_t n_draws, std::uint64_t seed);

// Convenience form for the built-in samplers at (w, lambda).
SamplerStats estimate_sampler_stats(SamplerKind kind, const ModelParams& w,
                                    std::span<const double> lambda,
                                    const FederatedDataset& dataset,
                                    std::size_t n_draws, std::uint64_t seed,
                                    std::size_t batch = 1);

}  // namespace afl

#endif  // AFL_SAMPLING_H_
