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

#include "afl/projection.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace afl {
namespace {

// Allowed rounding slack in the sum of a point treated as already on the
// simplex: 64 ulp per coordinate.
double simplex_sum_slack(std::size_t p) {
  return 64.0 * static_cast<double>(p) *
         std::numeric_limits<double>::epsilon();
}

}  // namespace

std::vector<double> project_simplex(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("project_simplex: non-finite entry");
    }
  }
  // Points already on the simplex (up to rounding in the sum) are fixed
  // points; returning them unchanged makes the projection exactly idempotent.
  {
    double sum = 0.0;
    bool nonnegative = true;
    for (double x : v) {
      sum += x;
      nonnegative = nonnegative && x >= 0.0;
    }
    if (nonnegative && std::abs(sum - 1.0) <= simplex_sum_slack(v.size())) {
      std::vector<double> out(v.begin(), v.end());
      for (double& x : out) x = x > 0.0 ? x : 0.0;  // drop -0.0
      return out;
    }
  }
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest rho with sorted[rho] - (prefix(rho) - 1) / (rho + 1) > 0.
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    prefix += sorted[i];
    const double candidate = (prefix - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = v[i] - tau;
    out[i] = x > 0.0 ? x : 0.0;
  }
  return out;
}

void project_ball_in_place(std::span<double> w, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_ball: radius <= 0");
  double sq = 0.0;
  for (double x : w) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm <= radius) return;
  const double scale = radius / norm;
  for (double& x : w) x *= scale;
}

std::vector<double> project_ball(std::span<const double> w, double radius) {
  std::vector<double> out(w.begin(), w.end());
  project_ball_in_place(out, radius);
  return out;
}

std::vector<double> project_coordinates(std::span<const double> v,
                                        const LambdaDomain& domain) {
  if (v.size() != domain.coordinate_dimension()) {
    throw std::invalid_argument("project_coordinates: wrong dimension");
  }
  return project_simplex(v);
}

MixtureWeights project_lambda(std::span<const double> v,
                              const LambdaDomain& domain) {
  return domain.to_mixture(project_coordinates(v, domain));
}

}  // namespace afl
