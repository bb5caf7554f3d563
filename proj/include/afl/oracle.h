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

// Brute-force references for tests: closed-form constants of the two-domain
// counterexample, a grid minimax solver for constant-feature instances, an
// active-set enumeration for simplex projection, and exact sampler variances.
//
// Nothing here calls into the model, objective, projection or sampling code.

#ifndef AFL_ORACLE_H_
#define AFL_ORACLE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "afl/data.h"

namespace afl::oracle {

struct Prop1Analytics {
  double uniform_solution = 0.0;       // P(y = 0) under the uniform optimum
  double uniform_agnostic_loss = 0.0;  // log(4 / sqrt(3))
  double minimax_value = 0.0;          // log 2
  double gap = 0.0;                    // log(2 / sqrt(3))
};

Prop1Analytics prop1_analytics();

// Mixture set given by its vertices; empty means the Dirac measures.
using Vertices = std::vector<std::vector<double>>;

struct GridMinimaxResult {
  double value = 0.0;
  std::vector<double> argmin;  // class probabilities
  std::size_t argmax_vertex = 0;
  double resolution = 0.0;
  std::size_t grid_points = 0;
};

// min over predicted class probabilities q (grid of step `resolution` on the
// C-simplex) of max over vertices of sum_k lambda_k CE_k(q). Every example
// must share one feature vector, so a model reduces to one q; C <= 3.
// Losses use the same 1e-12 probability floor as the model.
GridMinimaxResult grid_minimax(const FederatedDataset& dataset,
                               const Vertices& vertices, double resolution);

// Two-class variant refined by ternary search on the convex objective; the
// value is accurate to about `tolerance` in P(y = 1).
GridMinimaxResult binary_minimax(const FederatedDataset& dataset,
                                 const Vertices& vertices,
                                 double tolerance = 1e-12);

// min over q of sum_k lambda_k CE_k(q) for constant-feature data: the
// entropy of the mixed label distribution.
double constant_feature_min_loss(const FederatedDataset& dataset,
                                 std::span<const double> lambda);

// Two-domain minimax value over the full simplex by the dual form
// max_lambda min_q = max_lambda H(mixed label distribution), with the
// concave maximand solved by ternary search. Constant-feature data only.
double two_domain_dual_minimax(const FederatedDataset& dataset,
                               double tolerance = 1e-12);

// Per-domain label frequencies, p x C.
std::vector<std::vector<double>> label_frequencies(const FederatedDataset& dataset);

// Euclidean projection onto the simplex by trying every support set and
// keeping the feasible KKT point closest to v. p <= 16.
std::vector<double> qp_projection_oracle(std::span<const double> v);

struct KktResidual {
  double stationarity = 0.0;        // |v_i - x_i - tau| on the support
  double complementarity = 0.0;     // |x_i * nu_i|
  double primal_feasibility = 0.0;  // |sum x - 1| and negative parts
  double dual_feasibility = 0.0;    // negative parts of nu
  double max() const;
};

// Residuals of x as a projection of v, with tau fitted on the support of x.
KktResidual kkt_residual(std::span<const double> v, std::span<const double> x);

// Exact second moments of the gradient estimators at (w, lambda), by full
// enumeration. w is C x (d + 1) row major with the bias last.
struct ExactVariances {
  std::vector<double> weight_gradient;  // sum_k lambda_k grad L_k
  std::vector<double> domain_losses;    // the exact lambda gradient
  double sigma2_intra = 0.0;  // max_k (1/m_k) sum_i ||grad l_ki - grad L_k||^2
  double sigma2_outer = 0.0;  // sum_k lambda_k ||grad L_k - grad L||^2
  double lambda_sampler = 0.0;
  double perdomain = 0.0;
  double weighted = 0.0;
  double k_weighted = 0.0;
  double max_example_loss = 0.0;
};

ExactVariances exact_variances(std::span<const double> w,
                               const FederatedDataset& dataset,
                               std::span<const double> lambda,
                               std::size_t batch = 1);

// Cross-entropy gradient of one example, computed independently of the
// model code.
std::vector<double> example_gradient(std::span<const double> w,
                                     std::size_t num_classes,
                                     std::span<const double> x, std::size_t y);
double example_loss(std::span<const double> w, std::size_t num_classes,
                    std::span<const double> x, std::size_t y);

}  // namespace afl::oracle

#endif  // AFL_ORACLE_H_
