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

#include "afl/model.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "afl/errors.h"
#include "parallel.h"

namespace afl {

double floor_loss_bound() { return -std::log(kProbabilityFloor); }

ModelParams::ModelParams(std::size_t num_classes, std::size_t num_features,
                         double radius)
    : ModelParams(num_classes, num_features, radius,
                  std::vector<double>(num_classes * (num_features + 1), 0.0)) {}

ModelParams::ModelParams(std::size_t num_classes, std::size_t num_features,
                         double radius, std::vector<double> coefficients)
    : num_classes_(num_classes),
      num_features_(num_features),
      radius_(radius),
      coefficients_(std::move(coefficients)) {
  if (num_classes_ < 1) throw std::invalid_argument("model needs >= 1 class");
  if (!(radius_ > 0.0)) throw std::invalid_argument("model radius must be > 0");
  if (coefficients_.size() != num_classes_ * (num_features_ + 1)) {
    throw std::invalid_argument("coefficient count does not match C x (d+1)");
  }
}

double ModelParams::norm() const {
  double sq = 0.0;
  for (double v : coefficients_) sq += v * v;
  return std::sqrt(sq);
}

namespace {

void check_dims(const ModelParams& w, std::span<const double> x) {
  if (x.size() != w.num_features()) {
    throw std::invalid_argument("feature vector has " + std::to_string(x.size()) +
                                " entries, model expects " +
                                std::to_string(w.num_features()));
  }
}

// Affine scores into `scores`; returns the maximum score.
double affine_scores(const ModelParams& w, std::span<const double> x,
                     std::span<double> scores) {
  const std::size_t d = w.num_features();
  const auto coef = w.coefficients();
  double top = -INFINITY;
  for (std::size_t c = 0; c < w.num_classes(); ++c) {
    const double* row = coef.data() + c * (d + 1);
    double s = row[d];
    for (std::size_t j = 0; j < d; ++j) s += row[j] * x[j];
    scores[c] = s;
    top = std::max(top, s);
  }
  return top;
}

// Normalized exponentials in place; returns log-sum-exp of the scores.
double softmax_in_place(std::span<double> scores, double top) {
  double total = 0.0;
  for (double& s : scores) total += (s = std::exp(s - top));
  for (double& s : scores) s /= total;
  return top + std::log(total);
}

}  // namespace

std::vector<double> predict_proba(const ModelParams& w,
                                  std::span<const double> x) {
  check_dims(w, x);
  std::vector<double> p(w.num_classes());
  softmax_in_place(p, affine_scores(w, x, p));
  return p;
}

std::size_t predict_class(const ModelParams& w, std::span<const double> x) {
  check_dims(w, x);
  std::vector<double> s(w.num_classes());
  affine_scores(w, x, s);
  return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
}

double example_loss(const ModelParams& w, std::span<const double> x,
                    std::size_t y) {
  check_dims(w, x);
  std::vector<double> s(w.num_classes());
  const double top = affine_scores(w, x, s);
  double total = 0.0;
  for (double v : s) total += std::exp(v - top);
  // log-sum-exp minus the true score is -log p_y without forming p_y.
  const double loss = top + std::log(total) - s[y];
  return std::clamp(loss, 0.0, floor_loss_bound());
}

void accumulate_example_grad(const ModelParams& w, std::span<const double> x,
                             std::size_t y, double scale,
                             std::span<double> out) {
  check_dims(w, x);
  const std::size_t d = w.num_features();
  double buf[16];
  std::vector<double> heap;
  std::span<double> p;
  if (w.num_classes() <= 16) {
    p = std::span<double>(buf, w.num_classes());
  } else {
    heap.resize(w.num_classes());
    p = heap;
  }
  softmax_in_place(p, affine_scores(w, x, p));
  for (std::size_t c = 0; c < w.num_classes(); ++c) {
    const double r = scale * (p[c] - (c == y ? 1.0 : 0.0));
    if (r == 0.0) continue;
    double* row = out.data() + c * (d + 1);
    for (std::size_t j = 0; j < d; ++j) row[j] += r * x[j];
    row[d] += r;
  }
}

std::vector<double> example_grad(const ModelParams& w,
                                 std::span<const double> x, std::size_t y) {
  std::vector<double> g(w.size(), 0.0);
  accumulate_example_grad(w, x, y, 1.0, g);
  return g;
}

double domain_loss(const ModelParams& w, const DomainDataset& domain) {
  const std::size_t n = domain.size();
  if (n == 0) throw std::invalid_argument("domain_loss: empty domain");
  std::vector<double> partial(internal::chunk_count(n), 0.0);
  internal::for_each_chunk(n, [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      s += example_loss(w, domain.examples[i].features, domain.examples[i].label);
    }
    partial[c] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total / static_cast<double>(n);
}

std::vector<double> domain_grad(const ModelParams& w,
                                const DomainDataset& domain) {
  const std::size_t n = domain.size();
  if (n == 0) throw std::invalid_argument("domain_grad: empty domain");
  const std::size_t chunks = internal::chunk_count(n);
  std::vector<std::vector<double>> partial(chunks);
  internal::for_each_chunk(n, [&](std::size_t c, std::size_t b, std::size_t e) {
    std::vector<double> g(w.size(), 0.0);
    for (std::size_t i = b; i < e; ++i) {
      accumulate_example_grad(w, domain.examples[i].features,
                              domain.examples[i].label, 1.0, g);
    }
    partial[c] = std::move(g);
  });
  std::vector<double> total(w.size(), 0.0);
  for (const auto& g : partial) {
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += g[j];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : total) v *= inv;
  return total;
}

double loss_bound_for_ball(std::size_t num_classes, double radius,
                           double max_augmented_norm) {
  const double ball = std::log(static_cast<double>(num_classes)) +
                      std::sqrt(2.0) * radius * max_augmented_norm;
  return std::min(floor_loss_bound(), ball);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[4] = {'A', 'F', 'L', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw IoError("truncated model file");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_model(const ModelParams& w, const std::string& path,
                const std::map<std::string, std::string>& extra_meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint64_t>(out, w.num_classes());
  write_le<std::uint64_t>(out, w.row_width());
  for (double v : w.coefficients()) write_le<double>(out, v);
  if (!out) throw IoError("error writing model file '" + path + "'");

  std::ofstream meta(path + ".meta");
  if (!meta) throw IoError("cannot write model sidecar '" + path + ".meta'");
  meta << std::setprecision(17);
  meta << "classes=" << w.num_classes() << '\n';
  meta << "features=" << w.num_features() << '\n';
  meta << "radius=" << w.radius() << '\n';
  for (const auto& [k, v] : extra_meta) meta << k << '=' << v << '\n';
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("'" + path + "' is not a model file");
  }
  if (read_le<std::uint32_t>(in) != kVersion) {
    throw IoError("unsupported model file version");
  }
  const auto rows = read_le<std::uint64_t>(in);
  const auto cols = read_le<std::uint64_t>(in);
  if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 26)) {
    throw IoError("implausible model shape in '" + path + "'");
  }
  std::vector<double> coef(rows * cols);
  for (double& v : coef) v = read_le<double>(in);

  double radius = 0.0;
  std::ifstream meta(path + ".meta");
  if (!meta) throw IoError("missing model sidecar '" + path + ".meta'");
  std::string line;
  std::size_t meta_classes = 0, meta_features = 0;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "radius") radius = std::stod(value);
    if (key == "classes") meta_classes = std::stoul(value);
    if (key == "features") meta_features = std::stoul(value);
  }
  if (meta_classes != rows || meta_features + 1 != cols) {
    throw IoError("model sidecar shape disagrees with '" + path + "'");
  }
  return ModelParams(rows, cols - 1, radius, std::move(coef));
}

}  // namespace afl
