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

#ifndef AFL_ERRORS_H_
#define AFL_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace afl {

// Malformed input data: missing columns, unparseable labels, unseen
// categories, empty domains.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run or bound configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values during optimization. Carries the iteration index at
// which the divergence was detected.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace afl

#endif  // AFL_ERRORS_H_
