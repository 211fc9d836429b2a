// Copyright 2026 The zlap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZLAP_EMBEDDINGS_HPP
#define ZLAP_EMBEDDINGS_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zlap/binary_io.hpp"
#include "zlap/error.hpp"

namespace zlap {

/// Dense row-major matrix of 32-bit embedding vectors. Holds image
/// features, class representations or prompt features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  FeatureMatrix(std::size_t rows, std::size_t dim)
      : FeatureMatrix(rows, dim, std::vector<float>(rows * dim, 0.0f)) {}

  FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<float> values)
      : rows_(rows), dim_(dim), values_(std::move(values)) {
    if (rows == 0 || dim == 0)
      throw Error(ErrorKind::empty_input, "feature matrix needs at least one row and column");
    if (values_.size() != rows * dim)
      throw Error(ErrorKind::shape, "feature matrix " + std::to_string(rows) + "x" +
                                        std::to_string(dim) + " given " +
                                        std::to_string(values_.size()) + " values");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<float> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

  float operator()(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }
  float& operator()(std::size_t i, std::size_t j) { return values_[i * dim_ + j]; }

  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

/// Class index in [0, C). Labels hold one per image.
using ClassIndex = std::uint32_t;
using LabelVector = std::vector<ClassIndex>;

/// Prompt embeddings for C classes with P prompts each; row c*P + j is the
/// j-th prompt of class c.
struct PromptGroup {
  std::size_t class_count = 0;
  std::size_t prompts_per_class = 0;
  FeatureMatrix prompt_features;
};

inline constexpr char kFeatureMagic[] = "ZLAP";
inline constexpr std::uint32_t kFeatureVersion = 1;

inline void write_features(const std::string& path, const FeatureMatrix& m) {
  binary::Writer out(path);
  out.magic({kFeatureMagic, 4});
  out.put<std::uint32_t>(kFeatureVersion);
  out.put<std::uint64_t>(m.rows());
  out.put<std::uint64_t>(m.dim());
  out.put_all<float>(m.values());
  out.finish();
}

/// Reads a feature file exactly as stored. No normalization is applied.
inline FeatureMatrix load_features(const std::string& path) {
  binary::Reader in(path);
  in.expect_magic({kFeatureMagic, 4});
  const auto version = in.get<std::uint32_t>();
  if (version != kFeatureVersion)
    throw Error(ErrorKind::format, "'" + path + "' has unsupported version " +
                                       std::to_string(version));
  const auto rows = in.get<std::uint64_t>();
  const auto dim = in.get<std::uint64_t>();
  if (rows == 0 || dim == 0)
    throw Error(ErrorKind::empty_input, "'" + path + "' declares an empty matrix");
  if (dim != 0 && rows > UINT64_MAX / dim)
    throw Error(ErrorKind::size, "'" + path + "' declares an impossible size");
  auto values = in.get_all<float>(rows * dim);
  in.expect_end();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw Error(ErrorKind::data, "'" + path + "' has a non-finite value at row " +
                                       std::to_string(i / dim) + ", column " +
                                       std::to_string(i % dim));
  }
  return FeatureMatrix(rows, dim, std::move(values));
}

inline double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t)
    acc += static_cast<double>(a[t]) * static_cast<double>(b[t]);
  return acc;
}

inline double l2_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

/// Divides every row by its Euclidean norm. All-zero rows are rejected
/// because their direction is undefined.
inline FeatureMatrix l2_normalize(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double norm = l2_norm(r);
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw Error(ErrorKind::degenerate, "row " + std::to_string(i) +
                                             " has zero norm and cannot be normalized");
    for (float& v : r) v = static_cast<float>(static_cast<double>(v) / norm);
  }
  return out;
}

inline PromptGroup make_prompt_group(FeatureMatrix prompts, std::size_t prompts_per_class) {
  if (prompts_per_class == 0)
    throw Error(ErrorKind::empty_input, "prompt group has zero prompts per class");
  if (prompts.rows() % prompts_per_class != 0)
    throw Error(ErrorKind::shape, std::to_string(prompts.rows()) +
                                      " prompt rows are not a multiple of " +
                                      std::to_string(prompts_per_class));
  const std::size_t classes = prompts.rows() / prompts_per_class;
  return PromptGroup{classes, prompts_per_class, std::move(prompts)};
}

/// Class representation = mean of the class's prompt embeddings, rescaled
/// to unit length.
inline FeatureMatrix average_class_prompts(const PromptGroup& g) {
  if (g.prompts_per_class == 0 || g.class_count == 0)
    throw Error(ErrorKind::empty_input, "prompt group is empty");
  if (g.prompt_features.rows() != g.class_count * g.prompts_per_class)
    throw Error(ErrorKind::shape, "prompt group row count does not equal C*P");
  const std::size_t dim = g.prompt_features.dim();
  FeatureMatrix out(g.class_count, dim);
  std::vector<double> mean(dim);
  for (std::size_t c = 0; c < g.class_count; ++c) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t p = 0; p < g.prompts_per_class; ++p) {
      const auto r = g.prompt_features.row(c * g.prompts_per_class + p);
      for (std::size_t t = 0; t < dim; ++t) mean[t] += r[t];
    }
    double sq = 0.0;
    for (double& v : mean) {
      v /= static_cast<double>(g.prompts_per_class);
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (!(norm > 1e-12))
      throw Error(ErrorKind::degenerate, "prompts of class " + std::to_string(c) +
                                             " average to the zero vector");
    auto dst = out.row(c);
    for (std::size_t t = 0; t < dim; ++t) dst[t] = static_cast<float>(mean[t] / norm);
  }
  return out;
}

/// One base-10 class index per line. Blank lines are ignored.
inline LabelVector load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  LabelVector labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    long long v = -1;
    std::string rest;
    if (!(ss >> v) || (ss >> rest) || v < 0 || v > static_cast<long long>(UINT32_MAX))
      throw Error(ErrorKind::data, "'" + path + "' line " + std::to_string(line_no) +
                                       " is not a class index");
    labels.push_back(static_cast<ClassIndex>(v));
  }
  return labels;
}

inline void write_labels(const std::string& path, std::span<const ClassIndex> labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  for (ClassIndex c : labels) out << c << '\n';
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

inline void validate_labels(std::span<const ClassIndex> labels, std::size_t class_count) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count)
      throw Error(ErrorKind::data, "label " + std::to_string(labels[i]) + " at position " +
                                       std::to_string(i) + " is not below class count " +
                                       std::to_string(class_count));
  }
}

/// Line i is the name of class i.
inline std::vector<std::string> load_class_names(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    names.push_back(line);
  }
  return names;
}

}  // namespace zlap

#endif  // ZLAP_EMBEDDINGS_HPP
