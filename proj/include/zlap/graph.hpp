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

#ifndef ZLAP_GRAPH_HPP
#define ZLAP_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zlap/embeddings.hpp"
#include "zlap/error.hpp"
#include "zlap/knn.hpp"
#include "zlap/sparse.hpp"

namespace zlap {

enum class SparsifyMode { row, column, global, none };

/// How image nodes find their neighbors. `separate` searches images and
/// classes independently; `joint` searches the union with a single k and
/// exists only to show why the separate search is needed.
enum class KnnMode { separate, joint };

struct GraphConfig {
  std::size_t k_image = 5;
  std::size_t k_class = 5;
  double gamma = 5.0;
  double alpha = 0.3;
  bool minmax_cross_modal = false;
  SparsifyMode sparsify_mode = SparsifyMode::row;
  std::size_t xi = 1;
  KnnMode knn_mode = KnnMode::separate;

  /// Defaults for prompt-averaged text class representations.
  static GraphConfig text_defaults() { return GraphConfig{}; }

  /// Defaults for proxy class representations (min-max normalized graph).
  static GraphConfig proxy_defaults() {
    GraphConfig cfg;
    cfg.k_image = cfg.k_class = 10;
    cfg.gamma = 3.0;
    cfg.alpha = 0.3;
    cfg.minmax_cross_modal = true;
    return cfg;
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw Error(ErrorKind::validation, "alpha must lie in (0, 1)");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw Error(ErrorKind::validation, "gamma must be positive");
    if (k_image == 0 || k_class == 0)
      throw Error(ErrorKind::validation, "k must be at least 1");
    if (xi == 0 && sparsify_mode != SparsifyMode::none)
      throw Error(ErrorKind::validation, "xi must be at least 1");
  }
};

/// h(v) = max(v, 0)^gamma.
inline double power_transform(double v, double gamma) {
  return v > 0.0 ? std::pow(v, gamma) : 0.0;
}

namespace detail {

inline bool is_cross_modal(std::size_t i, std::size_t j, std::size_t class_count) {
  return (i < class_count) != (j < class_count);
}

// Joint search: every image queries the union [classes; images] with one k.
inline NeighborList joint_search(const FeatureMatrix& images, const FeatureMatrix& classes,
                                 std::size_t k) {
  const std::size_t C = classes.rows();
  FeatureMatrix all(C + images.rows(), images.dim());
  std::copy(classes.values().begin(), classes.values().end(), all.values().begin());
  std::copy(images.values().begin(), images.values().end(),
            all.values().begin() + static_cast<std::ptrdiff_t>(C * images.dim()));
  const NeighborList wide = top_k(images, all, k + 1, false);
  const std::size_t k_eff = std::min(k, all.rows() - 1);
  NeighborList out(images.rows(), k_eff);
  for (std::size_t q = 0; q < images.rows(); ++q) {
    std::size_t n = 0;
    for (const auto& nb : wide[q]) {
      if (nb.index == C + q) continue;
      if (n == k_eff) break;
      out[q][n++] = nb;
    }
  }
  return out;
}

}  // namespace detail

inline SparseAdjacency minmax_normalize_values(const SparseAdjacency& S);

/// Directed adjacency S over [classes; images]. Image node C+i links to its
/// image neighbors with weight u_i.u_j and to its class neighbors with
/// weight h(u_i.w_c); text rows stay empty. Negative image-to-image
/// similarities are clipped to zero so every weight is nonnegative.
///
/// With `minmax_cross_modal`, edges are first stored with raw similarities,
/// all stored values are min-max scaled to [0, 1], and h is then applied to
/// the cross-modal entries.
inline SparseAdjacency build_bimodal_adjacency(const FeatureMatrix& images,
                                               const FeatureMatrix& classes,
                                               const GraphConfig& cfg) {
  cfg.validate();
  if (images.dim() != classes.dim())
    throw Error(ErrorKind::shape, "image dim " + std::to_string(images.dim()) +
                                      " != class dim " + std::to_string(classes.dim()));
  const std::size_t C = classes.rows();
  const std::size_t M = images.rows();
  std::vector<Triplet> triplets;
  const bool raw = cfg.minmax_cross_modal;
  auto image_weight = [&](float sim) { return raw ? sim : std::max(sim, 0.0f); };
  auto class_weight = [&](float sim) {
    return raw ? sim : static_cast<float>(power_transform(sim, cfg.gamma));
  };

  if (cfg.knn_mode == KnnMode::separate) {
    const NeighborList by_image = top_k(images, images, cfg.k_image, true);
    const NeighborList by_class = top_k(images, classes, cfg.k_class, false);
    triplets.reserve(M * (by_image.k() + by_class.k()));
    for (std::size_t i = 0; i < M; ++i) {
      for (const auto& nb : by_class[i])
        triplets.push_back({C + i, nb.index, class_weight(nb.similarity)});
      for (const auto& nb : by_image[i])
        triplets.push_back({C + i, C + nb.index, image_weight(nb.similarity)});
    }
  } else {
    const NeighborList joint = detail::joint_search(images, classes, cfg.k_image);
    triplets.reserve(M * joint.k());
    for (std::size_t i = 0; i < M; ++i) {
      for (const auto& nb : joint[i]) {
        const float w = nb.index < C ? class_weight(nb.similarity) : image_weight(nb.similarity);
        triplets.push_back({C + i, nb.index, w});
      }
    }
  }

  SparseAdjacency S = SparseAdjacency::from_triplets(C + M, C, std::move(triplets));
  if (!raw) return S;

  // Proxy mode: scale everything, then reweight cross-modal edges.
  SparseAdjacency scaled = minmax_normalize_values(S);
  std::vector<float> values(scaled.values().begin(), scaled.values().end());
  for (std::size_t i = 0; i < scaled.node_count(); ++i) {
    const auto cols = scaled.row_indices(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const std::size_t pos = scaled.offsets()[i] + p;
      if (detail::is_cross_modal(i, cols[p], C))
        values[pos] = static_cast<float>(power_transform(values[pos], cfg.gamma));
    }
  }
  return scaled.with_values(std::move(values));
}

/// Affine rescaling of all stored values onto [0, 1]. Structure unchanged.
inline SparseAdjacency minmax_normalize_values(const SparseAdjacency& S) {
  const auto v = S.values();
  if (v.empty()) throw Error(ErrorKind::degenerate, "no stored values to min-max normalize");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double min = *lo, max = *hi;
  if (!(max > min))
    throw Error(ErrorKind::degenerate, "all stored values equal; min-max range is zero");
  std::vector<float> out(v.size());
  for (std::size_t p = 0; p < v.size(); ++p)
    out[p] = static_cast<float>((static_cast<double>(v[p]) - min) / (max - min));
  return S.with_values(std::move(out));
}

/// S + S^T. Reciprocal edges add up.
inline SparseAdjacency symmetrize(const SparseAdjacency& S) {
  std::vector<Triplet> triplets;
  triplets.reserve(2 * S.nnz());
  for (std::size_t i = 0; i < S.node_count(); ++i) {
    const auto cols = S.row_indices(i);
    const auto vals = S.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      triplets.push_back({i, cols[p], vals[p]});
      triplets.push_back({cols[p], i, vals[p]});
    }
  }
  return SparseAdjacency::from_triplets(S.node_count(), S.class_count(), std::move(triplets));
}

/// Row sums of a nonnegative adjacency, in double.
inline std::vector<double> degrees(const SparseAdjacency& S) {
  std::vector<double> d(S.node_count(), 0.0);
  for (std::size_t i = 0; i < S.node_count(); ++i) {
    for (float v : S.row_values(i)) d[i] += v;
    if (d[i] < 0.0)
      throw Error(ErrorKind::data, "node " + std::to_string(i) + " has negative degree");
  }
  return d;
}

/// D^{-1/2} S D^{-1/2} with D = diag(S 1). Isolated nodes use degree 1 and
/// keep all-zero rows.
inline SparseAdjacency normalize_symmetric(const SparseAdjacency& S_bar) {
  std::vector<double> inv_sqrt = degrees(S_bar);
  for (double& d : inv_sqrt) d = 1.0 / std::sqrt(d > 0.0 ? d : 1.0);
  std::vector<float> values(S_bar.nnz());
  for (std::size_t i = 0; i < S_bar.node_count(); ++i) {
    const auto cols = S_bar.row_indices(i);
    const auto vals = S_bar.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      values[S_bar.offsets()[i] + p] =
          static_cast<float>(static_cast<double>(vals[p]) * inv_sqrt[i] * inv_sqrt[cols[p]]);
    }
  }
  return S_bar.with_values(std::move(values));
}

/// The three stages of graph construction.
struct BimodalGraph {
  SparseAdjacency directed;    // S
  SparseAdjacency symmetric;   // S + S^T
  SparseAdjacency normalized;  // D^{-1/2} (S + S^T) D^{-1/2}
};

inline BimodalGraph build_graph(const FeatureMatrix& images, const FeatureMatrix& classes,
                                const GraphConfig& cfg) {
  BimodalGraph g;
  g.directed = build_bimodal_adjacency(images, classes, cfg);
  g.symmetric = symmetrize(g.directed);
  g.normalized = normalize_symmetric(g.symmetric);
  return g;
}

/// Stored image-to-text entries (image rows, text columns).
inline std::size_t count_image_to_text_edges(const SparseAdjacency& S) {
  std::size_t count = 0;
  for (std::size_t i = S.class_count(); i < S.node_count(); ++i)
    for (std::size_t j : S.row_indices(i)) count += j < S.class_count() ? 1 : 0;
  return count;
}

/// Percentage of image nodes with at least one positive-weight edge to a
/// text node.
inline double class_link_coverage(const SparseAdjacency& S_bar) {
  const std::size_t C = S_bar.class_count();
  const std::size_t M = S_bar.image_count();
  if (M == 0) return 0.0;
  std::size_t linked = 0;
  for (std::size_t i = C; i < S_bar.node_count(); ++i) {
    const auto cols = S_bar.row_indices(i);
    const auto vals = S_bar.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (cols[p] < C && vals[p] > 0.0f) {
        ++linked;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(linked) / static_cast<double>(M);
}

/// For n = 1..n_max, the percentage of images whose unweighted shortest
/// path (over positive-weight edges of S_bar) to the text node of their
/// ground-truth class has length at most n. Entry n-1 holds the value for n.
inline std::vector<double> shortest_path_coverage(const SparseAdjacency& S_bar,
                                                  std::span<const ClassIndex> labels,
                                                  std::size_t n_max) {
  const std::size_t C = S_bar.class_count();
  const std::size_t M = S_bar.image_count();
  if (labels.size() != M)
    throw Error(ErrorKind::shape, "expected " + std::to_string(M) + " labels, got " +
                                      std::to_string(labels.size()));
  validate_labels(labels, C);
  std::vector<std::size_t> within(n_max + 1, 0);
  constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(S_bar.node_count());
  std::deque<std::size_t> frontier;
  for (std::size_t c = 0; c < C; ++c) {
    if (std::find(labels.begin(), labels.end(), c) == labels.end()) continue;
    std::fill(dist.begin(), dist.end(), kUnreached);
    dist[c] = 0;
    frontier.assign(1, c);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      if (dist[u] >= n_max) continue;
      const auto cols = S_bar.row_indices(u);
      const auto vals = S_bar.row_values(u);
      for (std::size_t p = 0; p < cols.size(); ++p) {
        if (vals[p] > 0.0f && dist[cols[p]] == kUnreached) {
          dist[cols[p]] = dist[u] + 1;
          frontier.push_back(cols[p]);
        }
      }
    }
    for (std::size_t i = 0; i < M; ++i)
      if (labels[i] == c && dist[C + i] != kUnreached) ++within[dist[C + i]];
  }
  std::vector<double> pct(n_max, 0.0);
  std::size_t cumulative = within[0];
  for (std::size_t n = 1; n <= n_max; ++n) {
    cumulative += within[n];
    pct[n - 1] = M == 0 ? 0.0 : 100.0 * static_cast<double>(cumulative) / static_cast<double>(M);
  }
  return pct;
}

}  // namespace zlap

#endif  // ZLAP_GRAPH_HPP
