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

#ifndef AFL_SRC_PARALLEL_H_
#define AFL_SRC_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace afl::internal {

// Chunk length for reductions over examples. Fixed so that the summation
// tree is the same for every thread count.
inline constexpr std::size_t kReductionChunk = 2048;

// Worker count from AFL_NUM_THREADS; 1 when unset or invalid.
inline std::size_t configured_threads() {
  const char* env = std::getenv("AFL_NUM_THREADS");
  if (env == nullptr) return 1;
  try {
    const long n = std::stol(env);
    return n > 0 ? static_cast<std::size_t>(n) : 1;
  } catch (...) {
    return 1;
  }
}

// Runs body(chunk_index, begin, end) for every chunk of [0, n), possibly on
// several threads. Each chunk writes only to its own slot, so the caller
// combines results in chunk order afterwards.
template <typename Body>
void for_each_chunk(std::size_t n, Body&& body) {
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  const std::size_t threads = std::min(configured_threads(), chunks);
  auto run = [&](std::size_t first_chunk, std::size_t stride) {
    for (std::size_t c = first_chunk; c < chunks; c += stride) {
      body(c, c * kReductionChunk, std::min(n, (c + 1) * kReductionChunk));
    }
  };
  if (threads <= 1) {
    run(0, 1);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
}

inline std::size_t chunk_count(std::size_t n) {
  return (n + kReductionChunk - 1) / kReductionChunk;
}

}  // namespace afl::internal

#endif  // AFL_SRC_PARALLEL_H_
