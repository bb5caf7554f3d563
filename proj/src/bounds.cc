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

#include "afl/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "afl/errors.h"

namespace afl {
namespace {

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

CoverSize exact_cover(std::uint64_t count, bool upper) {
  return {count, std::log(static_cast<double>(count)), false, upper};
}

// C(n, k) with saturation, and its exact logarithm.
CoverSize binomial_cover(std::uint64_t n, std::uint64_t k) {
  CoverSize c;
  c.is_upper_bound = true;
  c.log_count = std::lgamma(static_cast<double>(n) + 1.0) -
                std::lgamma(static_cast<double>(k) + 1.0) -
                std::lgamma(static_cast<double>(n - k) + 1.0);
  unsigned __int128 value = 1;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t i = 0; i < k; ++i) {
    // value * (n - i) / (i + 1) stays integral at every step.
    value = value * (n - i) / (i + 1);
    if (value > kMax) {
      c.saturated = true;
      c.count = kMax;
      return c;
    }
  }
  c.count = static_cast<std::uint64_t>(value);
  if (k == 0 || k == n) c.log_count = 0.0;
  return c;
}

BoundReport finish(BoundReport r) {
  r.total_bound = r.empirical_loss;
  for (const auto& t : r.terms) r.total_bound += t.value;
  return r;
}

const std::vector<double>& require_lambda(const BoundInputs& in) {
  if (!in.lambda) throw ConfigError("this bound needs a mixture lambda");
  if (in.lambda->size() != in.num_domains()) {
    throw ConfigError("lambda has " + std::to_string(in.lambda->size()) +
                      " entries for " + std::to_string(in.num_domains()) +
                      " domains");
  }
  MixtureWeights check(*in.lambda);
  return *in.lambda;
}

}  // namespace

std::size_t BoundInputs::total_size() const {
  std::size_t m = 0;
  for (auto mk : domain_sizes) m += mk;
  return m;
}

std::vector<double> BoundInputs::proportions() const {
  const double m = static_cast<double>(total_size());
  std::vector<double> out;
  out.reserve(domain_sizes.size());
  for (auto mk : domain_sizes) out.push_back(static_cast<double>(mk) / m);
  return out;
}

LambdaDomain BoundInputs::domain() const {
  return lambda_domain ? *lambda_domain
                       : LambdaDomain::full_simplex(num_domains());
}

void BoundInputs::validate() const {
  if (domain_sizes.empty()) throw ConfigError("domain_sizes is empty");
  for (auto mk : domain_sizes) {
    if (mk == 0) throw ConfigError("every domain needs m_k >= 1");
  }
  if (lambda_domain && lambda_domain->num_domains() != num_domains()) {
    throw ConfigError("lambda domain dimension does not match domain_sizes");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0, 1)");
  if (!(loss_bound > 0.0)) throw ConfigError("loss bound M must be > 0");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (vc_dimension && *vc_dimension < 1) throw ConfigError("VC dimension must be >= 1");
  if (l1_distance && !(*l1_distance >= 0.0 && *l1_distance <= 2.0)) {
    throw ConfigError("l1 distance must be in [0, 2]");
  }
  for (double r : rademacher) {
    if (!(r >= 0.0)) throw ConfigError("Rademacher values must be >= 0");
  }
}

CoverSize cover_size(const LambdaDomain& domain, double epsilon) {
  if (domain.is_full_simplex()) {
    if (!(epsilon > 0.0)) {
      throw ConfigError("the full simplex has no finite cover for epsilon <= 0");
    }
    const std::uint64_t p = domain.num_domains();
    if (p == 1) return exact_cover(1, false);
    const auto r = static_cast<std::uint64_t>(
        std::ceil(2.0 * static_cast<double>(p) / epsilon));
    return binomial_cover(r + p - 1, p - 1);
  }
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  const auto vertices = domain.vertices();
  const std::size_t J = vertices.size();
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < J; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      min_dist = std::min(min_dist,
                          l1_distance(vertices[i].values(), vertices[j].values()));
    }
  }
  if (epsilon < min_dist) return exact_cover(J, false);
  std::vector<bool> covered(J, false);
  std::uint64_t centers = 0;
  for (std::size_t i = 0; i < J; ++i) {
    if (covered[i]) continue;
    ++centers;
    for (std::size_t j = i; j < J; ++j) {
      if (l1_distance(vertices[i].values(), vertices[j].values()) <= epsilon) {
        covered[j] = true;
      }
    }
  }
  return exact_cover(centers, true);
}

double vc_complexity_bound(std::size_t d, std::size_t m, double skewness) {
  if (d < 1) throw ConfigError("VC dimension must be >= 1");
  if (m < d) {
    throw ConfigError("the growth-function bound needs m >= d (m = " + std::to_string(m) +
                      ", d = " + std::to_string(d) + ")");
  }
  if (!(skewness >= 1.0 - 1e-12)) throw ConfigError("skewness must be >= 1");
  const double dd = static_cast<double>(d), mm = static_cast<double>(m);
  return std::sqrt(2.0 * skewness * (dd / mm) * std::log(std::numbers::e * mm / dd));
}

BoundReport theorem1_bound(const BoundInputs& inputs, double empirical_loss,
                           SkewnessVariant variant) {
  inputs.validate();
  if (!inputs.vc_dimension) throw ConfigError("the uniform bound needs a VC dimension");
  const LambdaDomain domain = inputs.domain();
  const std::vector<double> m_bar = inputs.proportions();
  const std::size_t m = inputs.total_size();
  const double M = inputs.loss_bound;

  BoundReport r;
  r.empirical_loss = empirical_loss;
  if (variant == SkewnessVariant::kPerLambda) {
    r.variant = "per_lambda";
    r.skewness = skewness(require_lambda(inputs), m_bar);
  } else {
    r.variant = "max_over_lambda";
    r.skewness = skewness(domain, m_bar);
  }
  r.cover = cover_size(domain, inputs.epsilon);
  r.complexity_term = 2.0 * vc_complexity_bound(*inputs.vc_dimension, m, r.skewness);
  r.epsilon_term = M * inputs.epsilon;
  r.deviation_term =
      M * std::sqrt(r.skewness / (2.0 * static_cast<double>(m)) *
                    (r.cover.log_count - std::log(inputs.delta)));
  r.terms = {{"complexity", r.complexity_term},
             {"epsilon", r.epsilon_term},
             {"deviation", r.deviation_term}};
  return finish(std::move(r));
}

BoundReport corollary1_bound(const BoundInputs& inputs, double empirical_loss) {
  if (!inputs.l1_distance) throw ConfigError("corollary bound needs an l1 distance");
  BoundReport r =
      theorem1_bound(inputs, empirical_loss, SkewnessVariant::kMaxOverLambda);
  r.variant = "corollary";
  r.l1_term = inputs.loss_bound * *inputs.l1_distance;
  r.terms.push_back({"l1", r.l1_term});
  return finish(std::move(r));
}

BoundReport perdomain_bound(const BoundInputs& inputs, double empirical_loss) {
  inputs.validate();
  const std::size_t p = inputs.num_domains();
  if (inputs.rademacher.size() != p) {
    throw ConfigError("per-domain bound needs one Rademacher value per domain");
  }
  const auto& lambda = require_lambda(inputs);
  const double log_term = std::log(static_cast<double>(p) / inputs.delta);
  BoundReport r;
  r.variant = "per_domain";
  r.empirical_loss = empirical_loss;
  r.skewness = skewness(lambda, inputs.proportions());
  for (std::size_t k = 0; k < p; ++k) {
    r.complexity_term += 2.0 * lambda[k] * inputs.rademacher[k];
    r.deviation_term +=
        lambda[k] * inputs.loss_bound *
        std::sqrt(log_term / (2.0 * static_cast<double>(inputs.domain_sizes[k])));
  }
  r.terms = {{"complexity", r.complexity_term}, {"deviation", r.deviation_term}};
  return finish(std::move(r));
}

}  // namespace afl
