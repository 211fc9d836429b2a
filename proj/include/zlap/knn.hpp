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

#ifndef ZLAP_KNN_HPP
#define ZLAP_KNN_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "zlap/embeddings.hpp"
#include "zlap/error.hpp"
#include "zlap/parallel.hpp"

namespace zlap {

struct Neighbor {
  std::size_t index = 0;
  float similarity = 0.0f;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ranking used everywhere: larger similarity first, then smaller index.
inline bool ranks_before(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.index < b.index;
}

/// Fixed-width neighbor lists, one per query.
class NeighborList {
 public:
  NeighborList() = default;
  NeighborList(std::size_t queries, std::size_t k)
      : queries_(queries), k_(k), entries_(queries * k) {}

  std::size_t queries() const noexcept { return queries_; }
  /// Neighbors per query after clamping to the candidate count.
  std::size_t k() const noexcept { return k_; }

  std::span<const Neighbor> operator[](std::size_t q) const {
    return {entries_.data() + q * k_, k_};
  }
  std::span<Neighbor> operator[](std::size_t q) { return {entries_.data() + q * k_, k_}; }

  friend bool operator==(const NeighborList&, const NeighborList&) = default;

 private:
  std::size_t queries_ = 0;
  std::size_t k_ = 0;
  std::vector<Neighbor> entries_;
};

namespace detail {

inline constexpr std::size_t kCandidateBlock = 256;
inline constexpr std::size_t kQueryBlock = 16;

/// Candidates re-laid out block by block, dimension-major inside a block,
/// so the inner loop runs over contiguous candidates.
struct PackedCandidates {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> data;

  explicit PackedCandidates(const FeatureMatrix& m)
      : rows(m.rows()), dim(m.dim()), data(blocks() * kCandidateBlock * m.dim(), 0.0f) {
    for (std::size_t j = 0; j < rows; ++j) {
      const std::size_t b = j / kCandidateBlock, off = j % kCandidateBlock;
      float* base = data.data() + b * kCandidateBlock * dim;
      const auto r = m.row(j);
      for (std::size_t t = 0; t < dim; ++t) base[t * kCandidateBlock + off] = r[t];
    }
  }

  std::size_t blocks() const { return (rows + kCandidateBlock - 1) / kCandidateBlock; }
  const float* block(std::size_t b) const { return data.data() + b * kCandidateBlock * dim; }
};

/// Keeps the best `k` neighbors seen so far, sorted by `ranks_before`.
/// Candidates must arrive in ascending index order.
class TopK {
 public:
  explicit TopK(std::span<Neighbor> out) : out_(out) {}

  void offer(std::size_t index, float sim) {
    const std::size_t k = out_.size();
    if (k == 0) return;
    if (size_ == k) {
      // Equal similarity with a larger index never wins.
      if (!(sim > out_[k - 1].similarity)) return;
      --size_;
    }
    std::size_t pos = size_;
    while (pos > 0 && sim > out_[pos - 1].similarity) {
      out_[pos] = out_[pos - 1];
      --pos;
    }
    out_[pos] = Neighbor{index, sim};
    ++size_;
  }

  std::size_t size() const { return size_; }

 private:
  std::span<Neighbor> out_;
  std::size_t size_ = 0;
};

}  // namespace detail

/// Exact top-k inner-product search of every query row against every
/// candidate row. With `exclude_self`, candidate i is skipped for query i.
/// k is clamped to the number of eligible candidates. Each dot product is
/// accumulated in double in dimension order, so the output does not depend
/// on the thread count.
inline NeighborList top_k(const FeatureMatrix& queries, const FeatureMatrix& candidates,
                          std::size_t k, bool exclude_self) {
  if (k == 0) throw Error(ErrorKind::validation, "k must be at least 1");
  if (candidates.rows() == 0) throw Error(ErrorKind::empty_input, "candidate set is empty");
  if (queries.rows() == 0) return {};
  if (queries.dim() != candidates.dim())
    throw Error(ErrorKind::shape, "query dim " + std::to_string(queries.dim()) +
                                      " != candidate dim " + std::to_string(candidates.dim()));

  const std::size_t eligible = candidates.rows() - (exclude_self ? 1 : 0);
  const std::size_t k_eff = std::min(k, eligible);
  NeighborList result(queries.rows(), k_eff);
  if (k_eff == 0) return result;

  const detail::PackedCandidates packed(candidates);
  const std::size_t dim = queries.dim();
  const std::size_t query_blocks =
      (queries.rows() + detail::kQueryBlock - 1) / detail::kQueryBlock;

  parallel_for(query_blocks, [&](std::size_t qb) {
    using detail::kCandidateBlock;
    const std::size_t q_begin = qb * detail::kQueryBlock;
    const std::size_t q_end = std::min(queries.rows(), q_begin + detail::kQueryBlock);
    std::vector<detail::TopK> heaps;
    heaps.reserve(q_end - q_begin);
    for (std::size_t q = q_begin; q < q_end; ++q) heaps.emplace_back(result[q]);
    std::vector<double> acc(kCandidateBlock);

    for (std::size_t b = 0; b < packed.blocks(); ++b) {
      const float* block = packed.block(b);
      const std::size_t c_begin = b * kCandidateBlock;
      const std::size_t width = std::min(kCandidateBlock, candidates.rows() - c_begin);
      for (std::size_t q = q_begin; q < q_end; ++q) {
        const auto qrow = queries.row(q);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t t = 0; t < dim; ++t) {
          const double qv = qrow[t];
          const float* col = block + t * kCandidateBlock;
          for (std::size_t c = 0; c < kCandidateBlock; ++c)
            acc[c] += qv * static_cast<double>(col[c]);
        }
        auto& heap = heaps[q - q_begin];
        for (std::size_t c = 0; c < width; ++c) {
          const std::size_t j = c_begin + c;
          if (exclude_self && j == q) continue;
          heap.offer(j, static_cast<float>(acc[c]));
        }
      }
    }
  });
  return result;
}

}  // namespace zlap

#endif  // ZLAP_KNN_HPP
