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

#include "afl/oracle.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace afl::oracle {
namespace {

constexpr double kFloor = 1e-12;

double ce(double q) { return -std::log(std::max(q, kFloor)); }

Vertices resolve_vertices(const Vertices& vertices, std::size_t p) {
  if (!vertices.empty()) {
    for (const auto& v : vertices) {
      if (v.size() != p) throw std::invalid_argument("vertex has wrong dimension");
    }
    return vertices;
  }
  Vertices diracs(p, std::vector<double>(p, 0.0));
  for (std::size_t k = 0; k < p; ++k) diracs[k][k] = 1.0;
  return diracs;
}

void require_constant_features(const FederatedDataset& ds) {
  const auto& ref = ds.domain(0).examples.at(0).features;
  for (const auto& d : ds.domains()) {
    for (const auto& ex : d.examples) {
      if (ex.features != ref) {
        throw std::invalid_argument("oracle needs one shared feature vector");
      }
    }
  }
}

// max over vertices of the mixture cross-entropy at q.
std::pair<double, std::size_t> worst_vertex(
    const std::vector<std::vector<double>>& freq, const Vertices& vertices,
    std::span<const double> q) {
  std::vector<double> per_domain(freq.size(), 0.0);
  for (std::size_t k = 0; k < freq.size(); ++k) {
    for (std::size_t c = 0; c < q.size(); ++c) {
      if (freq[k][c] > 0.0) per_domain[k] += freq[k][c] * ce(q[c]);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    double v = 0.0;
    for (std::size_t k = 0; k < freq.size(); ++k) v += vertices[j][k] * per_domain[k];
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  return {best, arg};
}

std::vector<double> softmax_scores(std::span<const double> w, std::size_t C,
                                   std::span<const double> x) {
  const std::size_t width = x.size() + 1;
  if (w.size() != C * width) throw std::invalid_argument("w has wrong size");
  std::vector<double> s(C);
  for (std::size_t c = 0; c < C; ++c) {
    double v = w[c * width + x.size()];
    for (std::size_t j = 0; j < x.size(); ++j) v += w[c * width + j] * x[j];
    s[c] = v;
  }
  return s;
}

}  // namespace

Prop1Analytics prop1_analytics() {
  Prop1Analytics a;
  a.uniform_solution = 0.25;
  a.uniform_agnostic_loss = std::log(4.0 / std::sqrt(3.0));
  a.minimax_value = std::log(2.0);
  a.gap = std::log(2.0 / std::sqrt(3.0));
  return a;
}

std::vector<std::vector<double>> label_frequencies(const FederatedDataset& ds) {
  std::vector<std::vector<double>> f(ds.num_domains(),
                                     std::vector<double>(ds.num_classes(), 0.0));
  for (std::size_t k = 0; k < ds.num_domains(); ++k) {
    const auto& d = ds.domain(k);
    for (const auto& ex : d.examples) f[k][ex.label] += 1.0;
    for (double& x : f[k]) x /= static_cast<double>(d.size());
  }
  return f;
}

GridMinimaxResult grid_minimax(const FederatedDataset& ds,
                               const Vertices& vertices, double resolution) {
  const std::size_t C = ds.num_classes();
  if (C < 2 || C > 3) throw std::invalid_argument("grid_minimax supports 2 or 3 classes");
  if (!(resolution > 0.0 && resolution <= 0.5)) {
    throw std::invalid_argument("grid resolution must be in (0, 0.5]");
  }
  require_constant_features(ds);
  const Vertices verts = resolve_vertices(vertices, ds.num_domains());
  const auto freq = label_frequencies(ds);
  const auto n = static_cast<std::size_t>(std::llround(1.0 / resolution));
  if (C == 3 && (n + 1) * (n + 2) / 2 > 100'000'000) {
    throw std::invalid_argument("grid too fine for 3 classes");
  }
  GridMinimaxResult r;
  r.resolution = 1.0 / static_cast<double>(n);
  r.value = std::numeric_limits<double>::infinity();
  std::vector<double> q(C);
  const auto consider = [&] {
    ++r.grid_points;
    const auto [v, j] = worst_vertex(freq, verts, q);
    if (v < r.value) {
      r.value = v;
      r.argmin = q;
      r.argmax_vertex = j;
    }
  };
  const double step = r.resolution;
  for (std::size_t i = 0; i <= n; ++i) {
    if (C == 2) {
      q[0] = static_cast<double>(n - i) * step;
      q[1] = static_cast<double>(i) * step;
      consider();
      continue;
    }
    for (std::size_t j = 0; i + j <= n; ++j) {
      q[0] = static_cast<double>(i) * step;
      q[1] = static_cast<double>(j) * step;
      q[2] = static_cast<double>(n - i - j) * step;
      consider();
    }
  }
  return r;
}

GridMinimaxResult binary_minimax(const FederatedDataset& ds,
                                 const Vertices& vertices, double tolerance) {
  if (ds.num_classes() != 2) throw std::invalid_argument("binary_minimax needs 2 classes");
  require_constant_features(ds);
  const Vertices verts = resolve_vertices(vertices, ds.num_domains());
  const auto freq = label_frequencies(ds);
  const auto f = [&](double q1) {
    const double q[2] = {1.0 - q1, q1};
    return worst_vertex(freq, verts, q);
  };
  double lo = 0.0, hi = 1.0;
  std::size_t evaluations = 0;
  while (hi - lo > tolerance && evaluations < 2000) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (f(a).first <= f(b).first) {
      hi = b;
    } else {
      lo = a;
    }
    evaluations += 2;
  }
  GridMinimaxResult r;
  const double q1 = 0.5 * (lo + hi);
  const auto [v, j] = f(q1);
  r.value = v;
  r.argmin = {1.0 - q1, q1};
  r.argmax_vertex = j;
  r.resolution = hi - lo;
  r.grid_points = evaluations + 1;
  return r;
}

double constant_feature_min_loss(const FederatedDataset& ds,
                                 std::span<const double> lambda) {
  require_constant_features(ds);
  if (lambda.size() != ds.num_domains()) throw std::invalid_argument("lambda dimension");
  const auto freq = label_frequencies(ds);
  double h = 0.0;
  for (std::size_t c = 0; c < ds.num_classes(); ++c) {
    double q = 0.0;
    for (std::size_t k = 0; k < freq.size(); ++k) q += lambda[k] * freq[k][c];
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

double two_domain_dual_minimax(const FederatedDataset& ds, double tolerance) {
  if (ds.num_domains() != 2) throw std::invalid_argument("needs exactly two domains");
  const auto h = [&](double a) {
    const double lambda[2] = {a, 1.0 - a};
    return constant_feature_min_loss(ds, lambda);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 400 && hi - lo > tolerance; ++i) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (h(a) >= h(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return h(0.5 * (lo + hi));
}

std::vector<double> qp_projection_oracle(std::span<const double> v) {
  const std::size_t p = v.size();
  if (p == 0 || p > 16) throw std::invalid_argument("qp oracle supports 1 <= p <= 16");
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<double> x(p);
  for (std::uint32_t mask = 1; mask < (1u << p); ++mask) {
    double sum = 0.0;
    std::size_t size = 0;
    for (std::size_t i = 0; i < p; ++i) {
      if (mask & (1u << i)) {
        sum += v[i];
        ++size;
      }
    }
    const double tau = (sum - 1.0) / static_cast<double>(size);
    bool feasible = true;
    double dist = 0.0;
    for (std::size_t i = 0; i < p && feasible; ++i) {
      if (mask & (1u << i)) {
        x[i] = v[i] - tau;
        feasible = x[i] >= 0.0;
      } else {
        x[i] = 0.0;
      }
      dist += (x[i] - v[i]) * (x[i] - v[i]);
    }
    if (feasible && dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

double KktResidual::max() const {
  return std::max({stationarity, complementarity, primal_feasibility,
                   dual_feasibility});
}

KktResidual kkt_residual(std::span<const double> v, std::span<const double> x) {
  if (v.size() != x.size() || v.empty()) throw std::invalid_argument("kkt: sizes");
  KktResidual r;
  double tau = 0.0, sum = 0.0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += x[i];
    r.primal_feasibility = std::max(r.primal_feasibility, -x[i]);
    if (x[i] > 0.0) {
      tau += v[i] - x[i];
      ++support;
    }
  }
  r.primal_feasibility = std::max(r.primal_feasibility, std::abs(sum - 1.0));
  if (support == 0) {
    r.primal_feasibility = std::max(r.primal_feasibility, 1.0);
    return r;
  }
  tau /= static_cast<double>(support);
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Stationarity: x - v + tau 1 - nu = 0, nu >= 0, nu_i x_i = 0.
    const double nu = x[i] - v[i] + tau;
    if (x[i] > 0.0) {
      r.stationarity = std::max(r.stationarity, std::abs(nu));
    } else {
      r.dual_feasibility = std::max(r.dual_feasibility, -nu);
    }
    r.complementarity = std::max(r.complementarity, std::abs(x[i] * (x[i] > 0.0 ? nu : 0.0)));
  }
  return r;
}

double example_loss(std::span<const double> w, std::size_t C,
                    std::span<const double> x, std::size_t y) {
  const auto s = softmax_scores(w, C, x);
  const double top = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double v : s) z += std::exp(v - top);
  const double log_p = s[y] - top - std::log(z);
  return std::min(-log_p, -std::log(kFloor));
}

std::vector<double> example_gradient(std::span<const double> w, std::size_t C,
                                     std::span<const double> x, std::size_t y) {
  auto s = softmax_scores(w, C, x);
  const double top = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double& v : s) z += (v = std::exp(v - top));
  const std::size_t width = x.size() + 1;
  std::vector<double> g(C * width);
  for (std::size_t c = 0; c < C; ++c) {
    const double r = s[c] / z - (c == y ? 1.0 : 0.0);
    for (std::size_t j = 0; j < x.size(); ++j) g[c * width + j] = r * x[j];
    g[c * width + x.size()] = r;
  }
  return g;
}

ExactVariances exact_variances(std::span<const double> w,
                               const FederatedDataset& ds,
                               std::span<const double> lambda,
                               std::size_t batch) {
  const std::size_t p = ds.num_domains(), C = ds.num_classes();
  if (lambda.size() != p) throw std::invalid_argument("lambda dimension");
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  const std::size_t n = w.size();
  const auto sq = [](std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  };

  ExactVariances out;
  std::vector<std::vector<double>> mean_grad(p, std::vector<double>(n, 0.0));
  std::vector<double> intra(p, 0.0), mean_sq_loss(p, 0.0);
  out.domain_losses.assign(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const auto& d = ds.domain(k);
    const double mk = static_cast<double>(d.size());
    std::vector<std::vector<double>> grads;
    grads.reserve(d.size());
    for (const auto& ex : d.examples) {
      grads.push_back(example_gradient(w, C, ex.features, ex.label));
      for (std::size_t j = 0; j < n; ++j) mean_grad[k][j] += grads.back()[j] / mk;
      const double l = example_loss(w, C, ex.features, ex.label);
      out.domain_losses[k] += l / mk;
      mean_sq_loss[k] += l * l / mk;
      out.max_example_loss = std::max(out.max_example_loss, l);
    }
    for (const auto& g : grads) intra[k] += sq(g, mean_grad[k]) / mk;
  }
  out.weight_gradient.assign(n, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t j = 0; j < n; ++j) out.weight_gradient[j] += lambda[k] * mean_grad[k][j];
  }
  out.sigma2_intra = *std::max_element(intra.begin(), intra.end());
  double weighted_intra = 0.0;
  double perdomain = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    out.sigma2_outer += lambda[k] * sq(mean_grad[k], out.weight_gradient);
    weighted_intra += lambda[k] * intra[k];
    perdomain += lambda[k] * lambda[k] * intra[k];
  }
  double loss_sq_norm = 0.0, second = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    loss_sq_norm += out.domain_losses[k] * out.domain_losses[k];
    second += mean_sq_loss[k];
  }
  const double b = static_cast<double>(batch);
  out.lambda_sampler = (static_cast<double>(p) * second - loss_sq_norm) / b;
  out.perdomain = perdomain / b;
  out.weighted = (weighted_intra + out.sigma2_outer) / b;
  out.k_weighted = out.weighted / static_cast<double>(p);
  return out;
}

}  // namespace afl::oracle
