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

#ifndef AFL_PROJECTION_H_
#define AFL_PROJECTION_H_

#include <span>
#include <vector>

#include "afl/objective.h"

namespace afl {

// Euclidean projection onto the probability simplex by sort-and-threshold:
// finds tau with sum_i max(v_i - tau, 0) = 1 and returns max(v_i - tau, 0).
// Thresholded entries are exactly +0. Throws on non-finite input.
std::vector<double> project_simplex(std::span<const double> v);

// w if ||w|| <= radius, else w * radius / ||w||.
std::vector<double> project_ball(std::span<const double> w, double radius);
void project_ball_in_place(std::span<double> w, double radius);

// Projection in the coordinates of `domain`: simplex projection of v, which
// lives in R^p for the full simplex and in vertex coordinates for a hull.
std::vector<double> project_coordinates(std::span<const double> v,
                                        const LambdaDomain& domain);

// The mixture obtained from project_coordinates.
MixtureWeights project_lambda(std::span<const double> v,
                              const LambdaDomain& domain);

}  // namespace afl

#endif  // AFL_PROJECTION_H_
