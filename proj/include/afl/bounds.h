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

// Generalization-bound calculators: epsilon-cover sizes of the mixture set,
// the VC route to the weighted Rademacher complexity, and the high-probability
// bounds that combine them.

#ifndef AFL_BOUNDS_H_
#define AFL_BOUNDS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "afl/objective.h"

namespace afl {

struct BoundInputs {
  // m_k; m_bar follows from these.
  std::vector<std::size_t> domain_sizes;
  // nullopt means the full simplex.
  std::optional<LambdaDomain> lambda_domain;
  double loss_bound = 1.0;  // M
  std::optional<std::size_t> vc_dimension;
  double delta = 0.05;
  double epsilon = 0.0;
  // min over Lambda of the l1 distance from the target distribution.
  std::optional<double> l1_distance;
  // Per-domain Rademacher complexities R_k, for perdomain_bound.
  std::vector<double> rademacher;
  // The mixture for per-lambda variants.
  std::optional<std::vector<double>> lambda;

  std::size_t num_domains() const { return domain_sizes.size(); }
  std::size_t total_size() const;
  std::vector<double> proportions() const;
  LambdaDomain domain() const;
  // Throws ConfigError on delta outside (0, 1), M <= 0, epsilon < 0 and
  // similar.
  void validate() const;
};

struct CoverSize {
  // Saturates at UINT64_MAX; log_count is always exact.
  std::uint64_t count = 1;
  double log_count = 0.0;
  bool saturated = false;
  // True when the construction only bounds the minimum cover from above.
  bool is_upper_bound = false;
};

// FiniteHull: vertex count when epsilon is below the smallest pairwise l1
// distance between vertices, otherwise a greedy cover by vertices.
// FullSimplex: lattice with spacing 1/r, r = ceil(2p / epsilon), giving
// C(r + p - 1, p - 1) points. Throws ConfigError on epsilon <= 0 for the full
// simplex.
CoverSize cover_size(const LambdaDomain& domain, double epsilon);

// sqrt(2 s (d / m) log(e m / d)). Throws ConfigError when m < d or d < 1.
double vc_complexity_bound(std::size_t d, std::size_t m, double skewness);

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct BoundReport {
  std::string variant;
  double empirical_loss = 0.0;
  double skewness = 1.0;
  CoverSize cover;
  double complexity_term = 0.0;  // 2 R
  double epsilon_term = 0.0;     // M epsilon
  double deviation_term = 0.0;
  double l1_term = 0.0;
  double total_bound = 0.0;
  // Every summand after empirical_loss, in order; total_bound is their sum
  // plus empirical_loss.
  std::vector<BoundTerm> terms;
};

enum class SkewnessVariant {
  // s(lambda || m_bar) for inputs.lambda.
  kPerLambda,
  // s(Lambda || m_bar), valid uniformly over Lambda.
  kMaxOverLambda,
};

// empirical + 2 R + M epsilon + M sqrt(s / (2m) log(|Lambda_eps| / delta)),
// with R from vc_complexity_bound.
BoundReport theorem1_bound(const BoundInputs& inputs, double empirical_loss,
                           SkewnessVariant variant =
                               SkewnessVariant::kMaxOverLambda);

// theorem1_bound (max over Lambda) + M l1. Requires inputs.l1_distance.
BoundReport corollary1_bound(const BoundInputs& inputs, double empirical_loss);

// empirical + sum_k (2 lambda_k R_k + lambda_k M sqrt(log(p / delta) / (2 m_k))).
// Requires inputs.rademacher and inputs.lambda.
BoundReport perdomain_bound(const BoundInputs& inputs, double empirical_loss);

}  // namespace afl

#endif  // AFL_BOUNDS_H_
