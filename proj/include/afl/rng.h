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

#ifndef AFL_RNG_H_
#define AFL_RNG_H_

#include <cstdint>
#include <limits>

namespace afl {

// What a random stream is used for. Part of the stream key so that, for a
// fixed seed, the lambda draws at step t are the same regardless of which
// w-sampler is selected.
enum class RngPurpose : std::uint64_t {
  kLambdaGradient = 1,
  kWeightGradient = 2,
  kPilot = 3,
  kSplit = 4,
  kSynth = 5,
  kTest = 6,
};

// Counter-based random stream. A stream is identified by
// (seed, counter, purpose); constructing the same key always replays the
// same sequence. The generator is SplitMix64 over the mixed key, and all
// derived draws (indices, uniforms, normals) are implemented here instead of
// through <random> distributions so that sequences are identical across
// standard library implementations.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t counter, RngPurpose purpose);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next(); }
  std::uint64_t next();

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform double in [0, 1) with 53 bits of resolution.
  double uniform01();

  // Standard normal via Box-Muller.
  double normal();

  // Reproducibility token: the mixed key this stream was started from.
  std::uint64_t tag() const { return tag_; }

 private:
  std::uint64_t state_;
  std::uint64_t tag_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace afl

#endif  // AFL_RNG_H_
