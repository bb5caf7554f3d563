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

#include "afl/objective.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace afl {
namespace {

constexpr double kClampTolerance = 1e-12;
constexpr double kSumTolerance = 1e-9;

}  // namespace

MixtureWeights::MixtureWeights(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("mixture weights are empty");
  double sum = 0.0;
  for (double& v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite mixture weight");
    if (v < -kClampTolerance) {
      throw std::invalid_argument("negative mixture weight " + std::to_string(v));
    }
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument("mixture weights sum to " + std::to_string(sum));
  }
}

MixtureWeights MixtureWeights::dirac(std::size_t p, std::size_t k) {
  std::vector<double> v(p, 0.0);
  v.at(k) = 1.0;
  return MixtureWeights(std::move(v));
}

MixtureWeights MixtureWeights::uniform(std::size_t p) {
  return MixtureWeights(std::vector<double>(p, 1.0 / static_cast<double>(p)));
}

// ---------------------------------------------------------------------------

LambdaDomain::LambdaDomain(bool full, std::size_t p,
                           std::vector<MixtureWeights> vertices)
    : full_(full), p_(p), vertices_(std::move(vertices)) {}

LambdaDomain LambdaDomain::full_simplex(std::size_t p) {
  if (p < 1) throw std::invalid_argument("simplex dimension must be >= 1");
  return LambdaDomain(true, p, {});
}

LambdaDomain LambdaDomain::finite_hull(std::vector<MixtureWeights> vertices) {
  if (vertices.empty()) throw std::invalid_argument("hull needs >= 1 vertex");
  const std::size_t p = vertices.front().size();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i].size() != p) {
      throw std::invalid_argument("hull vertices have different dimensions");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (vertices[i] == vertices[j]) {
        throw std::invalid_argument("hull vertices must be pairwise distinct");
      }
    }
  }
  return LambdaDomain(false, p, std::move(vertices));
}

std::vector<MixtureWeights> LambdaDomain::vertices() const {
  if (!full_) return vertices_;
  std::vector<MixtureWeights> out;
  out.reserve(p_);
  for (std::size_t k = 0; k < p_; ++k) out.push_back(MixtureWeights::dirac(p_, k));
  return out;
}

MixtureWeights LambdaDomain::to_mixture(std::span<const double> coords) const {
  if (coords.size() != coordinate_dimension()) {
    throw std::invalid_argument("coordinate vector has wrong dimension");
  }
  if (full_) return MixtureWeights({coords.begin(), coords.end()});
  std::vector<double> lambda(p_, 0.0);
  for (std::size_t j = 0; j < vertices_.size(); ++j) {
    for (std::size_t k = 0; k < p_; ++k) lambda[k] += coords[j] * vertices_[j][k];
  }
  return MixtureWeights(std::move(lambda));
}

std::vector<double> LambdaDomain::lambda_to_coordinate_gradient(
    std::span<const double> g) const {
  if (g.size() != p_) throw std::invalid_argument("gradient has wrong dimension");
  if (full_) return {g.begin(), g.end()};
  std::vector<double> out(vertices_.size(), 0.0);
  for (std::size_t j = 0; j < vertices_.size(); ++j) {
    for (std::size_t k = 0; k < p_; ++k) out[j] += vertices_[j][k] * g[k];
  }
  return out;
}

double LambdaDomain::max_squared_norm() const {
  if (full_) return 1.0;
  double best = 0.0;
  for (const auto& v : vertices_) {
    double sq = 0.0;
    for (double x : v.values()) sq += x * x;
    best = std::max(best, sq);
  }
  return best;
}

double LambdaDomain::max_norm() const { return std::sqrt(max_squared_norm()); }

void RegularizedObjectiveConfig::validate(std::size_t p) const {
  if (!(std::isfinite(gamma) && gamma >= 0.0)) {
    throw std::invalid_argument("gamma must be finite and >= 0");
  }
  if (!(std::isfinite(mu) && mu >= 0.0)) {
    throw std::invalid_argument("mu must be finite and >= 0");
  }
  if (mu > 0.0 && reference.size() != p) {
    throw std::invalid_argument("reference proportions have wrong dimension");
  }
}

// ---------------------------------------------------------------------------

std::vector<double> domain_losses(const ModelParams& w,
                                  const FederatedDataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.num_domains());
  for (const auto& d : dataset.domains()) out.push_back(domain_loss(w, d));
  return out;
}

double mixture_loss(const ModelParams& w, std::span<const double> lambda,
                    const FederatedDataset& dataset) {
  if (lambda.size() != dataset.num_domains()) {
    throw std::invalid_argument("lambda has " + std::to_string(lambda.size()) +
                                " entries for " +
                                std::to_string(dataset.num_domains()) + " domains");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    if (lambda[k] != 0.0) total += lambda[k] * domain_loss(w, dataset.domain(k));
  }
  return total;
}

AgnosticLoss agnostic_loss_from_losses(std::span<const double> losses,
                                       const LambdaDomain& domain) {
  if (losses.size() != domain.num_domains()) {
    throw std::invalid_argument("loss vector has wrong dimension");
  }
  const std::vector<MixtureWeights> verts = domain.vertices();
  std::size_t best = 0;
  double best_value = -INFINITY;
  for (std::size_t j = 0; j < verts.size(); ++j) {
    double v = 0.0;
    for (std::size_t k = 0; k < losses.size(); ++k) {
      if (verts[j][k] != 0.0) v += verts[j][k] * losses[k];
    }
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return {best_value, verts[best], best};
}

AgnosticLoss agnostic_loss(const ModelParams& w, const LambdaDomain& domain,
                           const FederatedDataset& dataset) {
  return agnostic_loss_from_losses(domain_losses(w, dataset), domain);
}

double chi_squared(std::span<const double> lambda, std::span<const double> q) {
  if (lambda.size() != q.size()) {
    throw std::invalid_argument("chi_squared: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!(q[k] > 0.0)) {
      throw std::invalid_argument("chi_squared: reference entry " +
                                  std::to_string(k) + " is not positive");
    }
    const double diff = lambda[k] - q[k];
    total += diff * diff / q[k];
  }
  return total;
}

double skewness(std::span<const double> lambda, std::span<const double> m_bar) {
  return chi_squared(lambda, m_bar) + 1.0;
}

double skewness(const LambdaDomain& domain, std::span<const double> m_bar) {
  if (m_bar.size() != domain.num_domains()) {
    throw std::invalid_argument("skewness: dimension mismatch");
  }
  if (domain.is_full_simplex()) {
    const double smallest = *std::min_element(m_bar.begin(), m_bar.end());
    if (!(smallest > 0.0)) {
      throw std::invalid_argument("skewness: reference has a non-positive entry");
    }
    return 1.0 / smallest;
  }
  double best = -INFINITY;
  for (const auto& v : domain.vertices()) {
    best = std::max(best, skewness(v.values(), m_bar));
  }
  return best;
}

double regularized_value(const ModelParams& w, std::span<const double> lambda,
                         const RegularizedObjectiveConfig& cfg,
                         const FederatedDataset& dataset) {
  cfg.validate(dataset.num_domains());
  double value = mixture_loss(w, lambda, dataset);
  if (cfg.gamma != 0.0) value += cfg.gamma * w.norm();
  if (cfg.mu != 0.0) value -= cfg.mu * chi_squared(lambda, cfg.reference);
  return value;
}

}  // namespace afl
