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

#include "afl/optimizer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "afl/errors.h"
#include "afl/projection.h"

namespace afl {
namespace {

double norm2(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

void check_finite(std::span<const double> v, const char* what, std::size_t t) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite ") + what + " at iteration " +
                             std::to_string(t),
                         t);
    }
  }
}

void add_into(std::vector<double>& acc, std::span<const double> v) {
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += v[j];
}

SaddleRun finish(std::vector<double> w_sum, std::vector<double> c_sum,
                 std::vector<double> w, std::vector<double> c, std::size_t T) {
  const double inv = 1.0 / static_cast<double>(T);
  for (double& x : w_sum) x *= inv;
  for (double& x : c_sum) x *= inv;
  return {std::move(w_sum), std::move(c_sum), std::move(w), std::move(c)};
}

class AdagradState {
 public:
  explicit AdagradState(std::size_t n) : sum_sq_(n, 0.0) {}
  // Scales g in place by 1 / sqrt(sum of squares so far).
  void precondition(std::vector<double>& g) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      sum_sq_[j] += g[j] * g[j];
      g[j] /= std::sqrt(sum_sq_[j]) + 1e-10;
    }
  }

 private:
  std::vector<double> sum_sq_;
};

void validate_options(const SaddleRunOptions& o) {
  if (o.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(o.step_w >= 0.0) || !(o.step_coords >= 0.0)) {
    throw std::invalid_argument("step sizes must be >= 0");
  }
}

}  // namespace

SaddleRun descent_ascent(const SaddleProblem& problem, std::vector<double> w,
                         std::vector<double> c,
                         const SaddleRunOptions& options) {
  validate_options(options);
  problem.project_w(w);
  problem.project_coords(c);
  std::vector<double> w_sum(w.size(), 0.0), c_sum(c.size(), 0.0);
  AdagradState adagrad(w.size());
  for (std::size_t t = 1; t <= options.iterations; ++t) {
    SaddleGradients g = problem.gradients(w, c, t);
    check_finite(g.w, "w-gradient", t);
    std::vector<double> step = g.w;
    if (options.update_rule == UpdateRule::kAdagrad) adagrad.precondition(step);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= options.step_w * step[j];
    problem.project_w(w);
    if (options.update_coords) {
      check_finite(g.coords, "lambda-gradient", t);
      for (std::size_t j = 0; j < c.size(); ++j) {
        c[j] += options.step_coords * g.coords[j];
      }
      problem.project_coords(c);
    }
    check_finite(w, "w iterate", t);
    check_finite(c, "lambda iterate", t);
    add_into(w_sum, w);
    add_into(c_sum, c);
    if (options.observer) options.observer(t, w, c, g);
  }
  return finish(std::move(w_sum), std::move(c_sum), std::move(w), std::move(c),
                options.iterations);
}

SaddleRun optimistic_descent_ascent(const SaddleProblem& problem,
                                    std::vector<double> w,
                                    std::vector<double> c,
                                    const SaddleRunOptions& options) {
  validate_options(options);
  problem.project_w(w);
  problem.project_coords(c);
  std::vector<double> w_sum(w.size(), 0.0), c_sum(c.size(), 0.0);
  AdagradState adagrad(w.size());
  SaddleGradients previous;
  for (std::size_t t = 1; t <= options.iterations; ++t) {
    SaddleGradients g = problem.gradients(w, c, t);
    check_finite(g.w, "w-gradient", t);
    const SaddleGradients& back = t == 1 ? g : previous;
    std::vector<double> step(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) step[j] = 2.0 * g.w[j] - back.w[j];
    if (options.update_rule == UpdateRule::kAdagrad) adagrad.precondition(step);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= options.step_w * step[j];
    problem.project_w(w);
    if (options.update_coords) {
      check_finite(g.coords, "lambda-gradient", t);
      for (std::size_t j = 0; j < c.size(); ++j) {
        c[j] += options.step_coords * (2.0 * g.coords[j] - back.coords[j]);
      }
      problem.project_coords(c);
    }
    check_finite(w, "w iterate", t);
    check_finite(c, "lambda iterate", t);
    add_into(w_sum, w);
    add_into(c_sum, c);
    if (options.observer) options.observer(t, w, c, g);
    previous = std::move(g);
  }
  return finish(std::move(w_sum), std::move(c_sum), std::move(w), std::move(c),
                options.iterations);
}

// ---------------------------------------------------------------------------

namespace {

enum class Mode { kAfl, kOptimistic, kFrozen };

LambdaDomain resolve_domain(const TrainConfig& config,
                            const FederatedDataset& ds) {
  if (!config.lambda_domain) return LambdaDomain::full_simplex(ds.num_domains());
  if (config.lambda_domain->num_domains() != ds.num_domains()) {
    throw ConfigError("lambda domain dimension does not match the dataset");
  }
  return *config.lambda_domain;
}

void validate_config(const TrainConfig& c) {
  if (c.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (c.step_w && !(*c.step_w >= 0.0)) throw ConfigError("step_w must be >= 0");
  if (c.step_lambda && !(*c.step_lambda >= 0.0)) {
    throw ConfigError("step_lambda must be >= 0");
  }
  if (!(c.radius > 0.0)) throw ConfigError("radius must be > 0");
  if (c.batch < 1) throw ConfigError("batch must be >= 1");
  if (c.sampler == SamplerKind::kLambdaUniform) {
    throw ConfigError("sampler must be perdomain, weighted or k_weighted");
  }
  if (!(c.gamma >= 0.0) || !(c.mu >= 0.0)) {
    throw ConfigError("gamma and mu must be >= 0");
  }
  if (c.pilot_draws < 2) throw ConfigError("pilot_draws must be >= 2");
}

std::vector<double> initial_coords(const LambdaDomain& domain,
                                   const FederatedDataset& ds) {
  if (domain.is_full_simplex()) return ds.empirical_proportions();
  const auto j = domain.coordinate_dimension();
  return std::vector<double>(j, 1.0 / static_cast<double>(j));
}

// Upper bound on ||V g|| / ||g|| for the vertex-coordinate chain rule.
double coordinate_gain(const LambdaDomain& domain) {
  if (domain.is_full_simplex()) return 1.0;
  return std::sqrt(static_cast<double>(domain.coordinate_dimension())) *
         domain.max_norm();
}

void add_norm_subgradient(std::vector<double>& g, std::span<const double> w,
                          double gamma) {
  if (gamma == 0.0) return;
  const double n = norm2(w);
  if (n == 0.0) return;
  for (std::size_t j = 0; j < g.size(); ++j) g[j] += gamma * w[j] / n;
}

}  // namespace

StepSizeEstimate estimate_step_sizes(const TrainConfig& config,
                                     const FederatedDataset& ds,
                                     bool update_lambda) {
  validate_config(config);
  const LambdaDomain domain = resolve_domain(config, ds);
  const ModelParams w0(ds.num_classes(), ds.num_features(), config.radius);
  const MixtureWeights lambda0 = domain.to_mixture(initial_coords(domain, ds));
  const double T = static_cast<double>(config.iterations);

  StepSizeEstimate est;
  est.radius_w = config.radius;
  est.radius_lambda = 1.0;  // max norm of the coordinate simplex

  const SamplerStats w_stats =
      estimate_sampler_stats(config.sampler, w0, lambda0.values(), ds,
                             config.pilot_draws, config.seed, config.batch);
  est.sigma2_w = w_stats.trace_variance;
  const double pilot_gw = norm2(weight_grad_full(w0, lambda0.values(), ds));
  const double analytic_gw = std::sqrt(2.0) * ds.max_augmented_feature_norm();
  est.grad_bound_w = std::max(pilot_gw, analytic_gw) + config.gamma;
  est.step_w = config.step_w.value_or(
      2.0 * est.radius_w / std::sqrt(T * (est.sigma2_w + est.grad_bound_w *
                                                             est.grad_bound_w)));

  if (update_lambda) {
    const SamplerStats l_stats = estimate_sampler_stats(
        [&](RngStream& rng) {
          const auto g = lambda_grad_stochastic(w0, ds, rng, config.batch);
          return domain.lambda_to_coordinate_gradient(g.value);
        },
        config.pilot_draws, config.seed * 2 + 1);
    est.sigma2_lambda = l_stats.trace_variance;
    const double M = config.loss_bound.value_or(loss_bound_for_ball(
        ds.num_classes(), config.radius, ds.max_augmented_feature_norm()));
    const double pilot_gl = norm2(domain.lambda_to_coordinate_gradient(
        lambda_grad_full(w0, ds)));
    const auto m_bar = ds.empirical_proportions();
    const double reg_bound =
        config.mu > 0.0
            ? 2.0 * config.mu / *std::min_element(m_bar.begin(), m_bar.end())
            : 0.0;
    const double analytic_gl =
        coordinate_gain(domain) *
        (std::sqrt(static_cast<double>(ds.num_domains())) * M + reg_bound);
    est.grad_bound_lambda = std::max(pilot_gl, analytic_gl);
    est.step_lambda = config.step_lambda.value_or(
        2.0 * est.radius_lambda /
        std::sqrt(T * (est.sigma2_lambda +
                       est.grad_bound_lambda * est.grad_bound_lambda)));
  }
  return est;
}

namespace {

TrainResult train(const TrainConfig& config, const FederatedDataset& ds,
                  Mode mode, std::optional<MixtureWeights> frozen,
                  std::string algorithm) {
  const auto start = std::chrono::steady_clock::now();
  validate_config(config);
  const LambdaDomain domain = resolve_domain(config, ds);
  const bool update_lambda = mode != Mode::kFrozen;
  const StepSizeEstimate steps = estimate_step_sizes(config, ds, update_lambda);
  const std::vector<double> m_bar = ds.empirical_proportions();
  const std::size_t C = ds.num_classes(), d = ds.num_features();

  // In frozen mode the coordinates are lambda itself.
  const auto to_lambda = [&](std::span<const double> c) {
    return update_lambda ? domain.to_mixture(c)
                         : MixtureWeights({c.begin(), c.end()});
  };

  SaddleProblem problem;
  problem.project_w = [&](std::span<double> w) {
    project_ball_in_place(w, config.radius);
  };
  problem.project_coords = [&](std::span<double> c) {
    if (!update_lambda) return;
    const auto projected = project_simplex(c);
    std::copy(projected.begin(), projected.end(), c.begin());
  };
  problem.gradients = [&](std::span<const double> w, std::span<const double> c,
                          std::size_t t) {
    const ModelParams model(C, d, config.radius, {w.begin(), w.end()});
    const MixtureWeights lambda = to_lambda(c);
    SaddleGradients g;
    RngStream w_rng(config.seed, t, RngPurpose::kWeightGradient);
    g.w = weight_grad_stochastic(config.sampler, model, lambda.values(), ds,
                                 w_rng, config.batch)
              .value;
    add_norm_subgradient(g.w, w, config.gamma);
    if (update_lambda) {
      RngStream l_rng(config.seed, t, RngPurpose::kLambdaGradient);
      std::vector<double> gl =
          lambda_grad_stochastic(model, ds, l_rng, config.batch).value;
      if (config.mu > 0.0) {
        const auto reg = reg_lambda_grad_term(lambda.values(), m_bar, config.mu);
        for (std::size_t k = 0; k < gl.size(); ++k) gl[k] += reg[k];
      }
      g.coords = domain.lambda_to_coordinate_gradient(gl);
    }
    return g;
  };

  std::vector<TrajectoryRecord> trajectory;
  SaddleRunOptions options;
  options.iterations = config.iterations;
  options.step_w = steps.step_w;
  options.step_coords = steps.step_lambda;
  options.update_coords = update_lambda;
  options.update_rule = config.update_rule;
  options.observer = [&](std::size_t t, std::span<const double> w,
                         std::span<const double> c, const SaddleGradients& g) {
    const bool log_now =
        t == config.iterations ||
        (config.log_interval > 0 && t % config.log_interval == 0);
    if (!config.observer && !log_now) return;
    const ModelParams model(C, d, config.radius, {w.begin(), w.end()});
    const MixtureWeights lambda = to_lambda(c);
    if (config.observer) config.observer(t, model, lambda);
    if (!log_now) return;
    TrajectoryRecord rec;
    rec.t = t;
    const auto losses = domain_losses(model, ds);
    for (std::size_t k = 0; k < losses.size(); ++k) {
      rec.mixture_loss += lambda[k] * losses[k];
    }
    rec.agnostic_loss = agnostic_loss_from_losses(losses, domain).value;
    if (!std::isfinite(rec.mixture_loss) || !std::isfinite(rec.agnostic_loss)) {
      throw NumericError("non-finite loss at iteration " + std::to_string(t), t);
    }
    rec.lambda = lambda.vector();
    rec.grad_norm_w = norm2(g.w);
    rec.grad_norm_lambda = norm2(g.coords);
    rec.step_w = steps.step_w;
    rec.step_lambda = steps.step_lambda;
    trajectory.push_back(std::move(rec));
  };

  std::vector<double> w0(C * (d + 1), 0.0);
  std::vector<double> c0 =
      update_lambda ? initial_coords(domain, ds) : frozen->vector();
  const SaddleRun run =
      mode == Mode::kOptimistic
          ? optimistic_descent_ascent(problem, std::move(w0), std::move(c0), options)
          : descent_ascent(problem, std::move(w0), std::move(c0), options);

  const auto stop = std::chrono::steady_clock::now();
  return TrainResult{
      std::move(algorithm),
      ModelParams(C, d, config.radius, run.w_avg),
      to_lambda(run.coords_avg),
      ModelParams(C, d, config.radius, run.w_final),
      to_lambda(run.coords_final),
      run.coords_avg,
      run.coords_final,
      steps,
      std::move(trajectory),
      std::chrono::duration<double>(stop - start).count()};
}

}  // namespace

TrainResult stochastic_afl(const TrainConfig& config,
                           const FederatedDataset& dataset) {
  return train(config, dataset, Mode::kAfl, std::nullopt, "stochastic_afl");
}

TrainResult optimistic_afl(const TrainConfig& config,
                           const FederatedDataset& dataset) {
  return train(config, dataset, Mode::kOptimistic, std::nullopt,
               "optimistic_afl");
}

TrainResult uniform_baseline(const TrainConfig& config,
                             const FederatedDataset& dataset) {
  return train(config, dataset, Mode::kFrozen,
               MixtureWeights(dataset.empirical_proportions()), "uniform");
}

TrainResult single_domain_baseline(const TrainConfig& config,
                                   const FederatedDataset& dataset,
                                   std::size_t k) {
  if (k >= dataset.num_domains()) {
    throw ConfigError("domain index " + std::to_string(k) + " out of range");
  }
  return train(config, dataset, Mode::kFrozen,
               MixtureWeights::dirac(dataset.num_domains(), k),
               "domain_" + std::to_string(k));
}

}  // namespace afl
