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

#include "afl/sampling.h"

#include <cmath>
#include <stdexcept>

#include "afl/objective.h"

namespace afl {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kLambdaUniform: return "lambda";
    case SamplerKind::kPerDomain: return "perdomain";
    case SamplerKind::kWeighted: return "weighted";
    case SamplerKind::kKWeighted: return "k_weighted";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "lambda") return SamplerKind::kLambdaUniform;
  if (name == "perdomain") return SamplerKind::kPerDomain;
  if (name == "weighted") return SamplerKind::kWeighted;
  if (name == "k_weighted" || name == "kweighted") return SamplerKind::kKWeighted;
  throw std::invalid_argument("unknown sampler '" + name + "'");
}

namespace {

void check_batch(std::size_t batch) {
  if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
}

void check_lambda(std::span<const double> lambda, const FederatedDataset& ds) {
  if (lambda.size() != ds.num_domains()) {
    throw std::invalid_argument("lambda has wrong dimension");
  }
}

void scale(std::vector<double>& v, double s) {
  for (double& x : v) x *= s;
}

// One Weighted draw accumulated into `out` with weight `scale_by`.
void weighted_draw(const ModelParams& w, std::span<const double> lambda,
                   const FederatedDataset& ds, RngStream& rng, double scale_by,
                   std::vector<double>& out, std::vector<DrawnIndex>& drawn) {
  const std::size_t k = sample_from_mixture(lambda, rng.uniform01());
  const DomainDataset& d = ds.domain(k);
  const std::size_t j = rng.uniform_index(d.size());
  accumulate_example_grad(w, d.examples[j].features, d.examples[j].label,
                          scale_by, out);
  drawn.push_back({k, j});
}

}  // namespace

std::vector<double> lambda_grad_full(const ModelParams& w,
                                     const FederatedDataset& dataset) {
  return domain_losses(w, dataset);
}

std::vector<double> weight_grad_full(const ModelParams& w,
                                     std::span<const double> lambda,
                                     const FederatedDataset& dataset) {
  check_lambda(lambda, dataset);
  std::vector<double> g(w.size(), 0.0);
  for (std::size_t k = 0; k < dataset.num_domains(); ++k) {
    if (lambda[k] == 0.0) continue;
    const auto gk = domain_grad(w, dataset.domain(k));
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += lambda[k] * gk[j];
  }
  return g;
}

GradientEstimate lambda_grad_stochastic(const ModelParams& w,
                                        const FederatedDataset& dataset,
                                        RngStream& rng, std::size_t batch) {
  check_batch(batch);
  const std::size_t p = dataset.num_domains();
  GradientEstimate est{std::vector<double>(p, 0.0), SamplerKind::kLambdaUniform,
                       {}, rng.tag()};
  est.drawn.reserve(batch);
  const double weight = static_cast<double>(p) / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t k = rng.uniform_index(p);
    const DomainDataset& d = dataset.domain(k);
    const std::size_t i = rng.uniform_index(d.size());
    est.value[k] +=
        weight * example_loss(w, d.examples[i].features, d.examples[i].label);
    est.drawn.push_back({k, i});
  }
  return est;
}

GradientEstimate perdomain_grad(const ModelParams& w,
                                std::span<const double> lambda,
                                const FederatedDataset& dataset, RngStream& rng,
                                std::size_t batch) {
  check_batch(batch);
  check_lambda(lambda, dataset);
  GradientEstimate est{std::vector<double>(w.size(), 0.0),
                       SamplerKind::kPerDomain, {}, rng.tag()};
  est.drawn.reserve(batch * dataset.num_domains());
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t k = 0; k < dataset.num_domains(); ++k) {
      const DomainDataset& d = dataset.domain(k);
      // The index is drawn even for zero-weight domains so that the stream
      // position does not depend on lambda.
      const std::size_t j = rng.uniform_index(d.size());
      est.drawn.push_back({k, j});
      if (lambda[k] == 0.0) continue;
      accumulate_example_grad(w, d.examples[j].features, d.examples[j].label,
                              lambda[k] * inv_batch, est.value);
    }
  }
  return est;
}

GradientEstimate weighted_grad(const ModelParams& w,
                               std::span<const double> lambda,
                               const FederatedDataset& dataset, RngStream& rng,
                               std::size_t batch) {
  check_batch(batch);
  check_lambda(lambda, dataset);
  for (double l : lambda) {
    if (l < 0.0) throw std::invalid_argument("weighted_grad: negative lambda entry");
  }
  GradientEstimate est{std::vector<double>(w.size(), 0.0),
                       SamplerKind::kWeighted, {}, rng.tag()};
  est.drawn.reserve(batch);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    weighted_draw(w, lambda, dataset, rng, inv_batch, est.value, est.drawn);
  }
  return est;
}

GradientEstimate k_weighted_grad(const ModelParams& w,
                                 std::span<const double> lambda,
                                 const FederatedDataset& dataset,
                                 RngStream& rng, std::size_t batch) {
  check_batch(batch);
  check_lambda(lambda, dataset);
  for (double l : lambda) {
    if (l < 0.0) throw std::invalid_argument("k_weighted_grad: negative lambda entry");
  }
  const std::size_t copies = dataset.num_domains() * batch;
  GradientEstimate est{std::vector<double>(w.size(), 0.0),
                       SamplerKind::kKWeighted, {}, rng.tag()};
  est.drawn.reserve(copies);
  const double inv = 1.0 / static_cast<double>(copies);
  for (std::size_t c = 0; c < copies; ++c) {
    weighted_draw(w, lambda, dataset, rng, inv, est.value, est.drawn);
  }
  return est;
}

GradientEstimate weight_grad_stochastic(SamplerKind kind, const ModelParams& w,
                                        std::span<const double> lambda,
                                        const FederatedDataset& dataset,
                                        RngStream& rng, std::size_t batch) {
  switch (kind) {
    case SamplerKind::kPerDomain:
      return perdomain_grad(w, lambda, dataset, rng, batch);
    case SamplerKind::kWeighted:
      return weighted_grad(w, lambda, dataset, rng, batch);
    case SamplerKind::kKWeighted:
      return k_weighted_grad(w, lambda, dataset, rng, batch);
    case SamplerKind::kLambdaUniform:
      break;
  }
  throw std::invalid_argument("not a w-sampler: " + to_string(kind));
}

std::size_t sample_from_mixture(std::span<const double> lambda, double u) {
  if (lambda.empty()) throw std::invalid_argument("empty mixture");
  double total = 0.0;
  for (double l : lambda) total += l;
  const double target = u * total;
  double cumulative = 0.0;
  std::size_t last_positive = lambda.size();
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    if (lambda[k] <= 0.0) continue;
    last_positive = k;
    cumulative += lambda[k];
    if (target < cumulative) return k;
  }
  if (last_positive == lambda.size()) {
    throw std::invalid_argument("mixture has no positive weight");
  }
  // Rounding in the running sum can leave target at or past the total.
  return last_positive;
}

std::vector<double> reg_lambda_grad_term(std::span<const double> lambda,
                                         std::span<const double> m_bar,
                                         double mu) {
  if (lambda.size() != m_bar.size()) {
    throw std::invalid_argument("reg_lambda_grad_term: dimension mismatch");
  }
  std::vector<double> out(lambda.size(), 0.0);
  if (mu == 0.0) return out;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    if (!(m_bar[k] > 0.0)) {
      throw std::invalid_argument("reg_lambda_grad_term: m_bar must be > 0");
    }
    out[k] = -2.0 * mu * lambda[k] / m_bar[k];
  }
  return out;
}

double SamplerStats::standard_error(std::size_t j) const {
  return std::sqrt(coordinate_variance.at(j) / static_cast<double>(draws));
}

SamplerStats estimate_sampler_stats(
    const std::function<std::vector<double>(RngStream&)>& draw,
    std::size_t n_draws, std::uint64_t seed) {
  if (n_draws < 2) throw std::invalid_argument("need at least 2 draws");
  std::vector<std::vector<double>> samples;
  samples.reserve(n_draws);
  for (std::size_t i = 0; i < n_draws; ++i) {
    RngStream rng(seed, i, RngPurpose::kPilot);
    samples.push_back(draw(rng));
    if (samples.back().size() != samples.front().size()) {
      throw std::invalid_argument("sampler returned inconsistent dimensions");
    }
  }
  const std::size_t dim = samples.front().size();
  const auto n = static_cast<double>(n_draws);

  SamplerStats stats;
  stats.draws = n_draws;
  stats.mean.assign(dim, 0.0);
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < dim; ++j) stats.mean[j] += s[j];
  }
  scale(stats.mean, 1.0 / n);

  stats.coordinate_variance.assign(dim, 0.0);
  std::vector<double> sq_dev(n_draws, 0.0);
  for (std::size_t i = 0; i < n_draws; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = samples[i][j] - stats.mean[j];
      stats.coordinate_variance[j] += d * d;
      acc += d * d;
    }
    sq_dev[i] = acc;
  }
  scale(stats.coordinate_variance, 1.0 / (n - 1.0));
  for (double v : stats.coordinate_variance) stats.trace_variance += v;

  // Spread of the per-draw squared deviations (scaled to the unbiased
  // estimator) gives the standard error of the trace estimate.
  double m1 = 0.0;
  for (double& v : sq_dev) m1 += (v *= n / (n - 1.0));
  m1 /= n;
  double m2 = 0.0;
  for (double v : sq_dev) m2 += (v - m1) * (v - m1);
  stats.trace_variance_standard_error = std::sqrt(m2 / (n - 1.0) / n);
  return stats;
}

SamplerStats estimate_sampler_stats(SamplerKind kind, const ModelParams& w,
                                    std::span<const double> lambda,
                                    const FederatedDataset& dataset,
                                    std::size_t n_draws, std::uint64_t seed,
                                    std::size_t batch) {
  std::vector<double> lam(lambda.begin(), lambda.end());
  if (kind == SamplerKind::kLambdaUniform) {
    return estimate_sampler_stats(
        [&](RngStream& rng) {
          return lambda_grad_stochastic(w, dataset, rng, batch).value;
        },
        n_draws, seed);
  }
  return estimate_sampler_stats(
      [&, lam](RngStream& rng) {
        return weight_grad_stochastic(kind, w, lam, dataset, rng, batch).value;
      },
      n_draws, seed);
}

}  // namespace afl
