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

#ifndef ZLAP_INFERENCE_HPP
#define ZLAP_INFERENCE_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zlap/binary_io.hpp"
#include "zlap/embeddings.hpp"
#include "zlap/error.hpp"
#include "zlap/graph.hpp"
#include "zlap/knn.hpp"
#include "zlap/parallel.hpp"
#include "zlap/solver.hpp"

namespace zlap {

enum class ScoreLayout : std::uint8_t { dense = 0, sparse = 1 };

/// N x C matrix of propagated class confidences. Column c solves
/// L y_c = e_c. Stored dense row-major or as CSR over rows.
class PropagatedScores {
 public:
  PropagatedScores() = default;

  static PropagatedScores dense(std::size_t nodes, std::size_t classes,
                                std::vector<float> values) {
    if (values.size() != nodes * classes)
      throw Error(ErrorKind::shape, "dense score payload does not match N*C");
    PropagatedScores s;
    s.layout_ = ScoreLayout::dense;
    s.nodes_ = nodes;
    s.classes_ = classes;
    s.values_ = std::move(values);
    return s;
  }

  static PropagatedScores sparse(std::size_t nodes, std::size_t classes,
                                 std::vector<std::size_t> offsets,
                                 std::vector<std::size_t> indices, std::vector<float> values) {
    if (offsets.size() != nodes + 1 || offsets.front() != 0 ||
        offsets.back() != indices.size() || values.size() != indices.size())
      throw Error(ErrorKind::shape, "inconsistent sparse score arrays");
    for (std::size_t i = 0; i < nodes; ++i) {
      if (offsets[i + 1] < offsets[i]) throw Error(ErrorKind::shape, "score offsets decrease");
      for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
        if (indices[p] >= classes) throw Error(ErrorKind::shape, "score column out of range");
        if (p > offsets[i] && indices[p - 1] >= indices[p])
          throw Error(ErrorKind::shape, "score columns not strictly ascending");
      }
    }
    PropagatedScores s;
    s.layout_ = ScoreLayout::sparse;
    s.nodes_ = nodes;
    s.classes_ = classes;
    s.offsets_ = std::move(offsets);
    s.indices_ = std::move(indices);
    s.values_ = std::move(values);
    return s;
  }

  ScoreLayout layout() const noexcept { return layout_; }
  std::size_t node_count() const noexcept { return nodes_; }
  std::size_t class_count() const noexcept { return classes_; }
  std::size_t stored() const noexcept { return values_.size(); }

  std::span<const float> values() const noexcept { return values_; }
  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const std::size_t> indices() const noexcept { return indices_; }

  float at(std::size_t node, std::size_t cls) const {
    if (layout_ == ScoreLayout::dense) return values_[node * classes_ + cls];
    const auto first = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[node]);
    const auto last = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[node + 1]);
    const auto it = std::lower_bound(first, last, cls);
    return (it != last && *it == cls) ? values_[static_cast<std::size_t>(it - indices_.begin())]
                                      : 0.0f;
  }

  /// z += weight * row(node).
  void accumulate_row(std::size_t node, double weight, std::span<double> z) const {
    if (layout_ == ScoreLayout::dense) {
      const float* row = values_.data() + node * classes_;
      for (std::size_t c = 0; c < classes_; ++c) z[c] += weight * static_cast<double>(row[c]);
    } else {
      for (std::size_t p = offsets_[node]; p < offsets_[node + 1]; ++p)
        z[indices_[p]] += weight * static_cast<double>(values_[p]);
    }
  }

  friend bool operator==(const PropagatedScores&, const PropagatedScores&) = default;

 private:
  ScoreLayout layout_ = ScoreLayout::dense;
  std::size_t nodes_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> indices_;
  std::vector<float> values_;
};

/// Sparse length-N representation of a query: weights on its image and
/// class neighbors, indices ascending.
struct IndicatorVector {
  std::size_t node_count = 0;
  std::vector<std::size_t> indices;
  std::vector<double> weights;

  bool is_zero() const {
    return std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
  }

  std::vector<double> to_dense() const {
    std::vector<double> v(node_count, 0.0);
    for (std::size_t p = 0; p < indices.size(); ++p) v[indices[p]] += weights[p];
    return v;
  }
};

struct Prediction {
  ClassIndex label = 0;
  std::vector<double> scores;
  bool converged = true;
  bool degenerate = false;  // all scores zero; label falls back to class 0
};

/// Index of the largest score; ties go to the lowest index.
inline ClassIndex argmax_lowest(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return static_cast<ClassIndex>(best);
}

inline Prediction make_prediction(std::vector<double> scores, bool converged) {
  Prediction p;
  p.label = argmax_lowest(scores);
  p.degenerate = std::all_of(scores.begin(), scores.end(), [](double s) { return s == 0.0; });
  p.scores = std::move(scores);
  p.converged = converged;
  return p;
}

/// Y_hat plus per-column convergence flags.
struct PrecomputedScores {
  PropagatedScores scores;
  std::vector<bool> column_converged;

  bool all_converged() const {
    return std::all_of(column_converged.begin(), column_converged.end(), [](bool b) { return b; });
  }
};

namespace detail {

/// Solves L y_c = e_c for every class, in parallel over classes. Returns
/// the N x C solutions row-major in double.
inline std::vector<double> solve_class_systems(const LaplacianOperator& op, std::size_t C,
                                               const SolveConfig& cfg,
                                               std::vector<bool>& converged) {
  if (C == 0 || C > op.size())
    throw Error(ErrorKind::shape, "class count must lie in [1, N]");
  const std::size_t N = op.size();
  std::vector<double> Y(N * C, 0.0);
  std::vector<char> ok(C, 0);
  parallel_for(C, [&](std::size_t c) {
    std::vector<double> e(N, 0.0);
    e[c] = 1.0;
    const SolveResult r = cg_solve(op, e, cfg);
    for (std::size_t i = 0; i < N; ++i) Y[i * C + c] = r.x[i];
    ok[c] = r.converged ? 1 : 0;
  });
  converged.assign(ok.begin(), ok.end());
  return Y;
}

inline std::vector<float> to_float(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

}  // namespace detail

struct TransductiveResult {
  std::vector<Prediction> predictions;  // one per image node, in image order
  PrecomputedScores propagated;
};

/// Label propagation over the graph's own image nodes: solves the C
/// systems L y_c = e_c and labels image node j by argmax_c y_c(j).
inline TransductiveResult transductive_predict(const LaplacianOperator& op, std::size_t C,
                                               const SolveConfig& cfg) {
  TransductiveResult out;
  const std::vector<double> Y =
      detail::solve_class_systems(op, C, cfg, out.propagated.column_converged);
  const std::size_t N = op.size();
  const bool converged = out.propagated.all_converged();
  out.predictions.reserve(N - C);
  for (std::size_t j = C; j < N; ++j) {
    std::vector<double> row(Y.begin() + static_cast<std::ptrdiff_t>(j * C),
                            Y.begin() + static_cast<std::ptrdiff_t>((j + 1) * C));
    out.predictions.push_back(make_prediction(std::move(row), converged));
  }
  out.propagated.scores = PropagatedScores::dense(N, C, detail::to_float(Y));
  return out;
}

/// The off-line step of fast inductive inference: dense Y_hat.
inline PrecomputedScores precompute_Y(const LaplacianOperator& op, std::size_t C,
                                      const SolveConfig& cfg) {
  PrecomputedScores out;
  const std::vector<double> Y = detail::solve_class_systems(op, C, cfg, out.column_converged);
  out.scores = PropagatedScores::dense(op.size(), C, detail::to_float(Y));
  return out;
}

/// Builds the indicator vectors for a batch of query rows. Each row links
/// to its image neighbors with weight max(x.u_j, 0) and to its class
/// neighbors with weight h(x.w_c). In proxy mode the raw weights of each
/// vector are min-max scaled first (a vector whose weights are all equal
/// maps to all ones), then h is applied to the class entries.
inline std::vector<IndicatorVector> build_indicators(const FeatureMatrix& queries,
                                                     const FeatureMatrix& images,
                                                     const FeatureMatrix& classes,
                                                     const GraphConfig& cfg) {
  cfg.validate();
  if (images.dim() != classes.dim() || queries.dim() != images.dim())
    throw Error(ErrorKind::shape, "query, image and class dims must match");
  const std::size_t C = classes.rows();
  const std::size_t N = C + images.rows();

  std::vector<std::vector<Neighbor>> found(queries.rows());
  if (cfg.knn_mode == KnnMode::separate) {
    const NeighborList by_class = top_k(queries, classes, cfg.k_class, false);
    const NeighborList by_image = top_k(queries, images, cfg.k_image, false);
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      for (const auto& nb : by_class[q]) found[q].push_back(nb);
      for (const auto& nb : by_image[q]) found[q].push_back({C + nb.index, nb.similarity});
    }
  } else {
    FeatureMatrix all(N, images.dim());
    std::copy(classes.values().begin(), classes.values().end(), all.values().begin());
    std::copy(images.values().begin(), images.values().end(),
              all.values().begin() + static_cast<std::ptrdiff_t>(C * images.dim()));
    const NeighborList joint = top_k(queries, all, cfg.k_image, false);
    for (std::size_t q = 0; q < queries.rows(); ++q)
      found[q].assign(joint[q].begin(), joint[q].end());
  }

  std::vector<IndicatorVector> out(queries.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    auto& nbs = found[q];
    std::sort(nbs.begin(), nbs.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    IndicatorVector& y = out[q];
    y.node_count = N;
    for (const auto& nb : nbs) {
      y.indices.push_back(nb.index);
      y.weights.push_back(nb.similarity);
    }
    if (cfg.minmax_cross_modal) {
      const auto [lo, hi] = std::minmax_element(y.weights.begin(), y.weights.end());
      const double min = *lo, max = *hi;
      for (double& w : y.weights) w = max > min ? (w - min) / (max - min) : 1.0;
    }
    for (std::size_t p = 0; p < y.indices.size(); ++p) {
      double& w = y.weights[p];
      w = y.indices[p] < C ? power_transform(w, cfg.gamma) : std::max(w, 0.0);
    }
  }
  return out;
}

inline IndicatorVector build_indicator(std::span<const float> x, const FeatureMatrix& images,
                                       const FeatureMatrix& classes, const GraphConfig& cfg) {
  const FeatureMatrix query(1, x.size(), std::vector<float>(x.begin(), x.end()));
  return std::move(build_indicators(query, images, classes, cfg).front());
}

/// One solve L z = y_x; the class scores are the first C entries of z.
inline Prediction dual_inductive_predict(const LaplacianOperator& op, const IndicatorVector& y_x,
                                         const SolveConfig& cfg) {
  if (y_x.node_count != op.size())
    throw Error(ErrorKind::shape, "indicator length does not match the graph");
  const SolveResult r = cg_solve(op, y_x.to_dense(), cfg);
  std::vector<double> scores(r.x.begin(),
                             r.x.begin() + static_cast<std::ptrdiff_t>(op.class_count()));
  return make_prediction(std::move(scores), r.converged);
}

/// The usual formulation: C solves per query, z_c = y_x . L^{-1} e_c.
/// Same answer as the dual path, kept for latency comparisons.
inline Prediction primal_inductive_predict(const LaplacianOperator& op,
                                           const IndicatorVector& y_x, const SolveConfig& cfg) {
  if (y_x.node_count != op.size())
    throw Error(ErrorKind::shape, "indicator length does not match the graph");
  const std::size_t C = op.class_count();
  std::vector<bool> converged;
  const std::vector<double> Y = detail::solve_class_systems(op, C, cfg, converged);
  std::vector<double> scores(C, 0.0);
  for (std::size_t p = 0; p < y_x.indices.size(); ++p)
    for (std::size_t c = 0; c < C; ++c) scores[c] += y_x.weights[p] * Y[y_x.indices[p] * C + c];
  const bool ok = std::all_of(converged.begin(), converged.end(), [](bool b) { return b; });
  return make_prediction(std::move(scores), ok);
}

/// z = y_x^T Y_hat, a weighted sum of Y_hat rows.
inline Prediction fast_inductive_predict(const IndicatorVector& y_x, const PropagatedScores& Y) {
  if (y_x.node_count != Y.node_count())
    throw Error(ErrorKind::shape, "indicator length " + std::to_string(y_x.node_count) +
                                      " does not match score rows " +
                                      std::to_string(Y.node_count()));
  std::vector<double> scores(Y.class_count(), 0.0);
  for (std::size_t p = 0; p < y_x.indices.size(); ++p)
    Y.accumulate_row(y_x.indices[p], y_x.weights[p], scores);
  return make_prediction(std::move(scores), true);
}

/// Keeps the xi largest entries per row, per column, or xi*N over the whole
/// matrix (clamped to what exists). Ties go to the smaller (row, column).
inline PropagatedScores sparsify_Y(const PropagatedScores& Y, SparsifyMode mode, std::size_t xi) {
  if (Y.layout() != ScoreLayout::dense)
    throw Error(ErrorKind::validation, "sparsification needs a dense score matrix");
  if (xi == 0) throw Error(ErrorKind::validation, "xi must be at least 1");
  if (mode == SparsifyMode::none)
    throw Error(ErrorKind::validation, "sparsification mode 'none' keeps the dense matrix");
  const std::size_t N = Y.node_count(), C = Y.class_count();
  const auto vals = Y.values();
  std::vector<char> keep(N * C, 0);

  // Larger value first, then smaller flat (row-major) position.
  auto better = [&](std::size_t a, std::size_t b) {
    return vals[a] != vals[b] ? vals[a] > vals[b] : a < b;
  };
  auto select = [&](std::vector<std::size_t>& pos, std::size_t count) {
    count = std::min(count, pos.size());
    std::partial_sort(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(count), pos.end(),
                      better);
    for (std::size_t i = 0; i < count; ++i) keep[pos[i]] = 1;
  };

  std::vector<std::size_t> pos;
  switch (mode) {
    case SparsifyMode::row:
      for (std::size_t i = 0; i < N; ++i) {
        pos.resize(C);
        std::iota(pos.begin(), pos.end(), i * C);
        select(pos, xi);
      }
      break;
    case SparsifyMode::column:
      for (std::size_t c = 0; c < C; ++c) {
        pos.resize(N);
        for (std::size_t i = 0; i < N; ++i) pos[i] = i * C + c;
        select(pos, xi);
      }
      break;
    case SparsifyMode::global: {
      pos.resize(N * C);
      std::iota(pos.begin(), pos.end(), std::size_t{0});
      const std::size_t budget = xi >= C ? N * C : xi * N;
      select(pos, budget);
      break;
    }
    case SparsifyMode::none:
      break;
  }

  std::vector<std::size_t> offsets(N + 1, 0), indices;
  std::vector<float> kept;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t c = 0; c < C; ++c) {
      if (keep[i * C + c]) {
        indices.push_back(c);
        kept.push_back(vals[i * C + c]);
      }
    }
    offsets[i + 1] = indices.size();
  }
  return PropagatedScores::sparse(N, C, std::move(offsets), std::move(indices), std::move(kept));
}

inline constexpr char kScoresMagic[] = "ZLPY";
inline constexpr std::uint32_t kScoresVersion = 1;

inline void write_scores(const std::string& path, const PropagatedScores& Y) {
  binary::Writer out(path);
  out.magic({kScoresMagic, 4});
  out.put<std::uint32_t>(kScoresVersion);
  out.put<std::uint8_t>(static_cast<std::uint8_t>(Y.layout()));
  out.put<std::uint64_t>(Y.node_count());
  out.put<std::uint64_t>(Y.class_count());
  if (Y.layout() == ScoreLayout::sparse) {
    out.put<std::uint64_t>(Y.stored());
    out.put_all<std::uint64_t>(Y.offsets());
    out.put_all<std::uint64_t>(Y.indices());
  }
  out.put_all<float>(Y.values());
  out.finish();
}

inline PropagatedScores load_scores(const std::string& path) {
  binary::Reader in(path);
  in.expect_magic({kScoresMagic, 4});
  const auto version = in.get<std::uint32_t>();
  if (version != kScoresVersion)
    throw Error(ErrorKind::format, "'" + path + "' has unsupported version " +
                                       std::to_string(version));
  const auto layout = in.get<std::uint8_t>();
  const auto N = in.get<std::uint64_t>();
  const auto C = in.get<std::uint64_t>();
  if (N == UINT64_MAX || (C != 0 && N > UINT64_MAX / C))
    throw Error(ErrorKind::size, "'" + path + "' declares an impossible size");
  try {
    if (layout == static_cast<std::uint8_t>(ScoreLayout::dense)) {
      auto values = in.get_all<float>(N * C);
      in.expect_end();
      return PropagatedScores::dense(N, C, std::move(values));
    }
    if (layout == static_cast<std::uint8_t>(ScoreLayout::sparse)) {
      const auto nnz = in.get<std::uint64_t>();
      auto offsets = in.get_all<std::uint64_t, std::size_t>(N + 1);
      auto indices = in.get_all<std::uint64_t, std::size_t>(nnz);
      auto values = in.get_all<float>(nnz);
      in.expect_end();
      return PropagatedScores::sparse(N, C, std::move(offsets), std::move(indices),
                                      std::move(values));
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::shape) throw;
    throw Error(ErrorKind::format, "'" + path + "' holds invalid scores (" + e.what() + ")");
  }
  throw Error(ErrorKind::format, "'" + path + "' has unknown layout " + std::to_string(layout));
}

/// Tab-separated "query_index, class_index, score" lines, where score is the
/// winning class's score. With `with_converged`, a fourth 0/1 column
/// reports solver convergence.
inline void write_predictions(const std::string& path, std::span<const Prediction> predictions,
                              bool with_converged) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << std::setprecision(9);
  for (std::size_t q = 0; q < predictions.size(); ++q) {
    const Prediction& p = predictions[q];
    const double score = p.scores.empty() ? 0.0 : p.scores[p.label];
    out << q << '\t' << p.label << '\t' << score;
    if (with_converged) out << '\t' << (p.converged ? 1 : 0);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace zlap

#endif  // ZLAP_INFERENCE_HPP
