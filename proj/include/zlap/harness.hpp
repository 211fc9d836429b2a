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

#ifndef ZLAP_HARNESS_HPP
#define ZLAP_HARNESS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "zlap/embeddings.hpp"
#include "zlap/error.hpp"
#include "zlap/knn.hpp"

namespace zlap {

/// Portable Gaussian source. Raw bits come from std::mt19937_64, whose
/// output sequence is fixed by the C++ standard. Uniforms in (0, 1] are
/// (1 + (bits >> 11)) * 2^-53; normals come from Box-Muller in pairs
/// (r cos t first, then r sin t), so streams match across platforms.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SynthConfig {
  std::size_t classes = 10;
  std::size_t images_per_class = 200;
  std::size_t dim = 64;
  double cluster_spread = 1.5;  // norm scale of the per-image Gaussian offset
  double modality_gap = 2.0;    // length of the shared image-side shift
  std::uint64_t seed = 0;

  void validate() const {
    if (classes < 2) throw Error(ErrorKind::validation, "synthetic data needs at least 2 classes");
    if (dim < 4) throw Error(ErrorKind::validation, "synthetic data needs dim >= 4");
    if (images_per_class == 0)
      throw Error(ErrorKind::validation, "images_per_class must be at least 1");
    if (!(cluster_spread > 0.0)) throw Error(ErrorKind::validation, "spread must be positive");
    if (!(modality_gap >= 0.0)) throw Error(ErrorKind::validation, "gap must be nonnegative");
  }
};

struct SynthData {
  FeatureMatrix images;
  FeatureMatrix classes;
  LabelVector labels;
};

/// Class anchors a_c are random unit vectors and serve as the class
/// representations. Image i belongs to class i mod C and is
/// normalize(a_c + gap * g + spread / sqrt(d) * n) with one shared unit
/// direction g and standard normal n. Draw order: anchors, then g, then
/// image noise in image order.
inline SynthData generate_bimodal(const SynthConfig& cfg) {
  cfg.validate();
  GaussianSource rng(cfg.seed);
  const std::size_t d = cfg.dim, C = cfg.classes, M = C * cfg.images_per_class;

  auto random_unit = [&] {
    std::vector<double> v(d);
    double sq = 0.0;
    do {
      sq = 0.0;
      for (double& x : v) {
        x = rng.normal();
        sq += x * x;
      }
    } while (sq == 0.0);
    for (double& x : v) x /= std::sqrt(sq);
    return v;
  };

  std::vector<std::vector<double>> anchors(C);
  FeatureMatrix classes(C, d);
  for (std::size_t c = 0; c < C; ++c) {
    anchors[c] = random_unit();
    for (std::size_t t = 0; t < d; ++t) classes(c, t) = static_cast<float>(anchors[c][t]);
  }
  const std::vector<double> gap_dir = random_unit();
  const double noise_scale = cfg.cluster_spread / std::sqrt(static_cast<double>(d));

  FeatureMatrix images(M, d);
  LabelVector labels(M);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < M; ++i) {
    const std::size_t c = i % C;
    labels[i] = static_cast<ClassIndex>(c);
    double sq = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      v[t] = anchors[c][t] + cfg.modality_gap * gap_dir[t] + noise_scale * rng.normal();
      sq += v[t] * v[t];
    }
    const double norm = std::sqrt(sq);
    for (std::size_t t = 0; t < d; ++t) images(i, t) = static_cast<float>(v[t] / norm);
  }
  return {std::move(images), std::move(classes), std::move(labels)};
}

struct EvalReport {
  double overall = 0.0;                  // percent
  std::vector<double> per_class;         // percent; 0 for classes without images
  std::vector<std::size_t> confusion;    // C x C row-major, row = true class
  std::size_t class_count = 0;

  std::size_t count(std::size_t truth, std::size_t predicted) const {
    return confusion[truth * class_count + predicted];
  }
};

inline EvalReport accuracy(std::span<const ClassIndex> predictions,
                           std::span<const ClassIndex> labels, std::size_t class_count) {
  if (predictions.size() != labels.size())
    throw Error(ErrorKind::shape, std::to_string(predictions.size()) + " predictions for " +
                                      std::to_string(labels.size()) + " labels");
  validate_labels(labels, class_count);
  validate_labels(predictions, class_count);
  EvalReport report;
  report.class_count = class_count;
  report.confusion.assign(class_count * class_count, 0);
  std::vector<std::size_t> totals(class_count, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++report.confusion[labels[i] * class_count + predictions[i]];
    ++totals[labels[i]];
    correct += predictions[i] == labels[i] ? 1 : 0;
  }
  report.overall = labels.empty() ? 0.0
                                  : 100.0 * static_cast<double>(correct) /
                                        static_cast<double>(labels.size());
  report.per_class.assign(class_count, 0.0);
  for (std::size_t c = 0; c < class_count; ++c) {
    if (totals[c] != 0)
      report.per_class[c] = 100.0 * static_cast<double>(report.count(c, c)) /
                            static_cast<double>(totals[c]);
  }
  return report;
}

/// Plain zero-shot rule: argmax_c u.w_c, ties to the lowest class.
inline LabelVector nearest_class_baseline(const FeatureMatrix& images, const FeatureMatrix& classes) {
  const NeighborList best = top_k(images, classes, 1, false);
  LabelVector out(images.rows());
  for (std::size_t i = 0; i < images.rows(); ++i)
    out[i] = static_cast<ClassIndex>(best[i][0].index);
  return out;
}

}  // namespace zlap

#endif  // ZLAP_HARNESS_HPP
