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

// Mixture and agnostic losses over domains, chi-squared divergence,
// skewness, and the penalized minimax objective
//
//   min_w max_{lambda in conv(Lambda)}  L(w, lambda) + gamma ||w||
//                                        - mu chi2(lambda || m_bar).

#ifndef AFL_OBJECTIVE_H_
#define AFL_OBJECTIVE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "afl/data.h"
#include "afl/model.h"

namespace afl {

// A point of the probability simplex. Entries within 1e-12 below zero are
// clamped to 0; the sum must be within 1e-9 of one.
class MixtureWeights {
 public:
  explicit MixtureWeights(std::vector<double> values);

  static MixtureWeights dirac(std::size_t p, std::size_t k);
  static MixtureWeights uniform(std::size_t p);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

  friend bool operator==(const MixtureWeights&, const MixtureWeights&) = default;

 private:
  std::vector<double> values_;
};

// The adversary's set: the whole simplex, or the convex hull of finitely
// many mixtures. Optimization over a hull runs in vertex coordinates alpha
// (a point of the J-vertex simplex) with lambda = sum_j alpha_j v_j.
class LambdaDomain {
 public:
  static LambdaDomain full_simplex(std::size_t p);
  static LambdaDomain finite_hull(std::vector<MixtureWeights> vertices);

  bool is_full_simplex() const { return full_; }
  std::size_t num_domains() const { return p_; }
  // Dimension of the coordinate simplex: p for the full simplex, J for a hull.
  std::size_t coordinate_dimension() const {
    return full_ ? p_ : vertices_.size();
  }
  // Hull vertices; for the full simplex, the p Dirac measures.
  std::vector<MixtureWeights> vertices() const;

  // lambda for coordinates alpha (identity on the full simplex).
  MixtureWeights to_mixture(std::span<const double> coords) const;
  // Chain rule: d/d alpha_j = v_j . g (identity on the full simplex).
  std::vector<double> lambda_to_coordinate_gradient(
      std::span<const double> lambda_gradient) const;

  // max over the set of ||lambda||_2 (attained at a vertex).
  double max_norm() const;
  // max over the set of sum_k lambda_k^2.
  double max_squared_norm() const;

 private:
  LambdaDomain(bool full, std::size_t p, std::vector<MixtureWeights> vertices);

  bool full_;
  std::size_t p_;
  std::vector<MixtureWeights> vertices_;
};

struct RegularizedObjectiveConfig {
  double gamma = 0.0;  // coefficient of ||w||_2
  double mu = 0.0;     // coefficient of chi2(lambda || reference)
  std::vector<double> reference;  // m_bar

  void validate(std::size_t p) const;
};

// L_k(w) for every domain.
std::vector<double> domain_losses(const ModelParams& w,
                                  const FederatedDataset& dataset);

// sum_k lambda_k L_k(w).
double mixture_loss(const ModelParams& w, std::span<const double> lambda,
                    const FederatedDataset& dataset);

struct AgnosticLoss {
  double value = 0.0;
  MixtureWeights argmax;
  std::size_t argmax_vertex = 0;
};

// max over Lambda of the mixture loss. By linearity in lambda the maximum is
// attained at a vertex; ties go to the lowest vertex index.
AgnosticLoss agnostic_loss(const ModelParams& w, const LambdaDomain& domain,
                           const FederatedDataset& dataset);
// Same maximization from precomputed per-domain losses.
AgnosticLoss agnostic_loss_from_losses(std::span<const double> losses,
                                       const LambdaDomain& domain);

// sum_k (lambda_k - q_k)^2 / q_k. Throws if any q_k <= 0.
double chi_squared(std::span<const double> lambda, std::span<const double> q);

// 1 + chi2(lambda || m_bar) for a single mixture.
double skewness(std::span<const double> lambda, std::span<const double> m_bar);
// 1 + max over Lambda of chi2(lambda || m_bar). On the full simplex this is
// 1 / min_k m_bar_k; on a hull the max of the convex chi2 is at a vertex.
double skewness(const LambdaDomain& domain, std::span<const double> m_bar);

// mixture_loss + gamma ||w|| - mu chi2(lambda || reference).
double regularized_value(const ModelParams& w, std::span<const double> lambda,
                         const RegularizedObjectiveConfig& cfg,
                         const FederatedDataset& dataset);

}  // namespace afl

#endif  // AFL_OBJECTIVE_H_
