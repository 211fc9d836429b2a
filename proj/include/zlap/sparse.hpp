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

#ifndef ZLAP_SPARSE_HPP
#define ZLAP_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zlap/binary_io.hpp"
#include "zlap/error.hpp"

namespace zlap {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  float value = 0.0f;
};

/// Square CSR matrix over C text nodes (indices 0..C-1) followed by image
/// nodes (C..N-1). Column indices are strictly ascending within each row;
/// the diagonal and the text-to-text block are never stored as nonzero.
class SparseAdjacency {
 public:
  SparseAdjacency() = default;

  SparseAdjacency(std::size_t node_count, std::size_t class_count,
                  std::vector<std::size_t> offsets, std::vector<std::size_t> indices,
                  std::vector<float> values)
      : node_count_(node_count),
        class_count_(class_count),
        offsets_(std::move(offsets)),
        indices_(std::move(indices)),
        values_(std::move(values)) {
    validate();
  }

  /// Assembles a CSR matrix, summing duplicate (row, col) pairs.
  static SparseAdjacency from_triplets(std::size_t node_count, std::size_t class_count,
                                       std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
      if (t.row >= node_count || t.col >= node_count)
        throw Error(ErrorKind::shape, "triplet (" + std::to_string(t.row) + ", " +
                                          std::to_string(t.col) + ") outside " +
                                          std::to_string(node_count) + " nodes");
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(node_count + 1, 0);
    std::vector<std::size_t> indices;
    std::vector<float> values;
    indices.reserve(triplets.size());
    values.reserve(triplets.size());
    for (std::size_t i = 0; i < triplets.size();) {
      const auto row = triplets[i].row, col = triplets[i].col;
      double sum = 0.0;
      for (; i < triplets.size() && triplets[i].row == row && triplets[i].col == col; ++i)
        sum += triplets[i].value;
      indices.push_back(col);
      values.push_back(static_cast<float>(sum));
      ++offsets[row + 1];
    }
    for (std::size_t r = 0; r < node_count; ++r) offsets[r + 1] += offsets[r];
    return SparseAdjacency(node_count, class_count, std::move(offsets), std::move(indices),
                           std::move(values));
  }

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t class_count() const noexcept { return class_count_; }
  std::size_t image_count() const noexcept { return node_count_ - class_count_; }
  std::size_t nnz() const noexcept { return indices_.size(); }

  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::span<const float> values() const noexcept { return values_; }

  std::span<const std::size_t> row_indices(std::size_t i) const {
    return {indices_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const float> row_values(std::size_t i) const {
    return {values_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  /// Stored value at (i, j), or 0 when the entry is not stored.
  float at(std::size_t i, std::size_t j) const {
    const auto cols = row_indices(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0f;
    return values_[offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
  }

  /// Same structure, new values.
  SparseAdjacency with_values(std::vector<float> values) const {
    if (values.size() != nnz())
      throw Error(ErrorKind::shape, "value count does not match the stored structure");
    return SparseAdjacency(node_count_, class_count_, offsets_, indices_, std::move(values));
  }

  /// y = A x, accumulated in double.
  void multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != node_count_ || y.size() != node_count_)
      throw Error(ErrorKind::shape, "vector length does not match node count");
    for (std::size_t i = 0; i < node_count_; ++i) {
      double acc = 0.0;
      for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p)
        acc += static_cast<double>(values_[p]) * x[indices_[p]];
      y[i] = acc;
    }
  }

  friend bool operator==(const SparseAdjacency&, const SparseAdjacency&) = default;

 private:
  void validate() const {
    if (class_count_ > node_count_)
      throw Error(ErrorKind::shape, "class count exceeds node count");
    if (offsets_.size() != node_count_ + 1 || offsets_.front() != 0 ||
        offsets_.back() != indices_.size() || values_.size() != indices_.size())
      throw Error(ErrorKind::shape, "inconsistent CSR arrays");
    for (std::size_t i = 0; i < node_count_; ++i) {
      if (offsets_[i + 1] < offsets_[i]) throw Error(ErrorKind::shape, "CSR offsets decrease");
      for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) {
        const std::size_t j = indices_[p];
        if (j >= node_count_) throw Error(ErrorKind::shape, "CSR column out of range");
        if (p > offsets_[i] && indices_[p - 1] >= j)
          throw Error(ErrorKind::shape, "CSR columns not strictly ascending in row " +
                                            std::to_string(i));
        if (!std::isfinite(values_[p]))
          throw Error(ErrorKind::data, "non-finite edge weight in row " + std::to_string(i));
        if (values_[p] != 0.0f && (j == i || (i < class_count_ && j < class_count_)))
          throw Error(ErrorKind::data, "forbidden edge (" + std::to_string(i) + ", " +
                                           std::to_string(j) + ")");
      }
    }
  }

  std::size_t node_count_ = 0;
  std::size_t class_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> indices_;
  std::vector<float> values_;
};

inline constexpr char kGraphMagic[] = "ZLGR";
inline constexpr std::uint32_t kGraphVersion = 1;

inline void write_graph(const std::string& path, const SparseAdjacency& g) {
  binary::Writer out(path);
  out.magic({kGraphMagic, 4});
  out.put<std::uint32_t>(kGraphVersion);
  out.put<std::uint64_t>(g.node_count());
  out.put<std::uint64_t>(g.class_count());
  out.put<std::uint64_t>(g.nnz());
  out.put_all<std::uint64_t>(g.offsets());
  out.put_all<std::uint64_t>(g.indices());
  out.put_all<float>(g.values());
  out.finish();
}

inline SparseAdjacency load_graph(const std::string& path) {
  binary::Reader in(path);
  in.expect_magic({kGraphMagic, 4});
  const auto version = in.get<std::uint32_t>();
  if (version != kGraphVersion)
    throw Error(ErrorKind::format, "'" + path + "' has unsupported version " +
                                       std::to_string(version));
  const auto nodes = in.get<std::uint64_t>();
  const auto classes = in.get<std::uint64_t>();
  const auto nnz = in.get<std::uint64_t>();
  if (nodes == UINT64_MAX) throw Error(ErrorKind::size, "'" + path + "' node count overflows");
  auto offsets = in.get_all<std::uint64_t, std::size_t>(nodes + 1);
  auto indices = in.get_all<std::uint64_t, std::size_t>(nnz);
  auto values = in.get_all<float>(nnz);
  in.expect_end();
  try {
    return SparseAdjacency(nodes, classes, std::move(offsets), std::move(indices),
                           std::move(values));
  } catch (const Error& e) {
    throw Error(ErrorKind::format, "'" + path + "' holds an invalid graph (" + e.what() + ")");
  }
}

}  // namespace zlap

#endif  // ZLAP_SPARSE_HPP
