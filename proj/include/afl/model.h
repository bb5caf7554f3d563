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

// Multiclass affine-softmax hypothesis with cross-entropy loss.

#ifndef AFL_MODEL_H_
#define AFL_MODEL_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "afl/data.h"

namespace afl {

// Probability floor used when evaluating the loss.
inline constexpr double kProbabilityFloor = 1e-12;

// Loss ceiling implied by kProbabilityFloor: -log(1e-12).
double floor_loss_bound();

// Coefficients of a C x (d_feat + 1) affine map, row major; the last column
// of each row is the bias. The Euclidean norm of the flattened coefficients
// is kept at most `radius` by the trainers.
class ModelParams {
 public:
  ModelParams(std::size_t num_classes, std::size_t num_features, double radius);
  ModelParams(std::size_t num_classes, std::size_t num_features, double radius,
              std::vector<double> coefficients);

  std::size_t num_classes() const { return num_classes_; }
  std::size_t num_features() const { return num_features_; }
  std::size_t row_width() const { return num_features_ + 1; }
  std::size_t size() const { return coefficients_.size(); }
  double radius() const { return radius_; }

  std::span<const double> coefficients() const { return coefficients_; }
  std::span<double> coefficients() { return coefficients_; }
  double& at(std::size_t cls, std::size_t col) {
    return coefficients_[cls * row_width() + col];
  }
  double at(std::size_t cls, std::size_t col) const {
    return coefficients_[cls * row_width() + col];
  }

  double norm() const;

 private:
  std::size_t num_classes_;
  std::size_t num_features_;
  double radius_;
  std::vector<double> coefficients_;
};

// Softmax of the affine scores, computed with max-score subtraction.
std::vector<double> predict_proba(const ModelParams& w,
                                  std::span<const double> x);

// Index of the largest score; ties go to the lowest index.
std::size_t predict_class(const ModelParams& w, std::span<const double> x);

// -log max(p_y, kProbabilityFloor).
double example_loss(const ModelParams& w, std::span<const double> x,
                    std::size_t y);

// Gradient of the cross-entropy w.r.t. the coefficients: (p - e_y) (x, 1)^T.
// The floor only affects the loss value; the gradient is the unclamped
// softmax gradient.
std::vector<double> example_grad(const ModelParams& w,
                                 std::span<const double> x, std::size_t y);

// Adds scale * example_grad(w, x, y) into out (size w.size()).
void accumulate_example_grad(const ModelParams& w, std::span<const double> x,
                             std::size_t y, double scale, std::span<double> out);

// Mean loss / mean gradient over a domain. Sums are formed in fixed chunks
// that are combined in order, so results do not depend on the thread count.
double domain_loss(const ModelParams& w, const DomainDataset& domain);
std::vector<double> domain_grad(const ModelParams& w,
                                const DomainDataset& domain);

// Upper bound on the example loss for any coefficients in the ball of
// `radius` and inputs with augmented norm at most max_augmented_norm:
// min(-log floor, log C + sqrt(2) * radius * max_augmented_norm).
double loss_bound_for_ball(std::size_t num_classes, double radius,
                           double max_augmented_norm);

// Binary format: "AFLW" magic, uint32 version, uint64 rows, uint64 cols, then
// rows*cols little-endian IEEE-754 doubles. The sidecar at path + ".meta" is
// key=value text holding classes, features, radius, plus any extra entries.
void save_model(const ModelParams& w, const std::string& path,
                const std::map<std::string, std::string>& extra_meta = {});
ModelParams load_model(const std::string& path);

}  // namespace afl

#endif  // AFL_MODEL_H_
