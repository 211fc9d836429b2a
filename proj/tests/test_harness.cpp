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

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "zlap/harness.hpp"

namespace zlap {
namespace {

TEST(Accuracy, PerfectAndZero) {
  const LabelVector labels = {0, 1, 2, 1};
  EXPECT_EQ(accuracy(labels, labels, 3).overall, 100.0);
  const LabelVector wrong = {1, 2, 0, 0};
  const auto r = accuracy(wrong, labels, 3);
  EXPECT_EQ(r.overall, 0.0);
  EXPECT_EQ(r.count(1, 2), 1u);
}

TEST(Accuracy, MatchesRecount) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<ClassIndex> cls(0, 6);
  LabelVector truth(1000), pred(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    truth[i] = cls(rng);
    pred[i] = (rng() % 3 == 0) ? cls(rng) : truth[i];
  }
  const auto r = accuracy(pred, truth, 7);
  std::size_t hits = 0, trace = 0, total = 0;
  for (std::size_t i = 0; i < 1000; ++i) hits += pred[i] == truth[i];
  for (std::size_t a = 0; a < 7; ++a)
    for (std::size_t b = 0; b < 7; ++b) {
      total += r.count(a, b);
      if (a == b) trace += r.count(a, b);
    }
  EXPECT_DOUBLE_EQ(r.overall, 100.0 * hits / 1000.0);
  EXPECT_EQ(total, 1000u);
  EXPECT_EQ(trace, hits);
  for (std::size_t c = 0; c < 7; ++c) {
    std::size_t n = 0, ok = 0;
    for (std::size_t i = 0; i < 1000; ++i)
      if (truth[i] == c) ++n, ok += pred[i] == c;
    EXPECT_DOUBLE_EQ(r.per_class[c], 100.0 * ok / n);
  }
}

TEST(Accuracy, Errors) {
  const LabelVector a = {0, 1}, b = {0};
  try {
    accuracy(a, b, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
  const LabelVector out_of_range = {0, 5};
  EXPECT_THROW(accuracy(out_of_range, a, 2), Error);
}

TEST(Synthetic, SameSeedIsBitIdentical) {
  SynthConfig cfg;
  cfg.classes = 4;
  cfg.images_per_class = 30;
  cfg.dim = 16;
  cfg.seed = 99;
  const auto a = generate_bimodal(cfg);
  const auto b = generate_bimodal(cfg);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.classes, b.classes);
  EXPECT_EQ(a.labels, b.labels);
  cfg.seed = 100;
  EXPECT_FALSE(generate_bimodal(cfg).images == a.images);
}

TEST(Synthetic, ShapesLabelsAndNorms) {
  SynthConfig cfg;
  cfg.classes = 3;
  cfg.images_per_class = 7;
  cfg.dim = 8;
  const auto d = generate_bimodal(cfg);
  EXPECT_EQ(d.images.rows(), 21u);
  EXPECT_EQ(d.classes.rows(), 3u);
  for (std::size_t i = 0; i < 21; ++i) {
    EXPECT_EQ(d.labels[i], i % 3);
    EXPECT_NEAR(l2_norm(d.images.row(i)), 1.0, 1e-6);
  }
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(l2_norm(d.classes.row(c)), 1.0, 1e-6);
}

TEST(Synthetic, NoGapTinySpreadCollapsesOntoAnchors) {
  SynthConfig cfg;
  cfg.classes = 5;
  cfg.images_per_class = 10;
  cfg.dim = 16;
  cfg.modality_gap = 0.0;
  cfg.cluster_spread = 1e-9;
  const auto d = generate_bimodal(cfg);
  for (std::size_t i = 0; i < d.images.rows(); ++i)
    for (std::size_t t = 0; t < 16; ++t)
      EXPECT_NEAR(d.images(i, t), d.classes(d.labels[i], t), 1e-6);
  EXPECT_EQ(accuracy(nearest_class_baseline(d.images, d.classes), d.labels, 5).overall, 100.0);
}

TEST(Synthetic, GapSeparatesModalities) {
  SynthConfig cfg;
  cfg.classes = 10;
  cfg.images_per_class = 40;
  cfg.dim = 64;
  cfg.modality_gap = 0.8;
  cfg.cluster_spread = 0.5;
  const auto d = generate_bimodal(cfg);
  double cross = 0.0, within = 0.0;
  std::size_t n_within = 0;
  for (std::size_t i = 0; i < d.images.rows(); ++i) {
    cross += testing::ref_dot(d.images.row(i), d.classes.row(d.labels[i]));
    for (std::size_t j = i + 1; j < d.images.rows(); ++j)
      if (d.labels[i] == d.labels[j]) {
        within += testing::ref_dot(d.images.row(i), d.images.row(j));
        ++n_within;
      }
  }
  EXPECT_LT(cross / d.images.rows(), within / n_within);
}

TEST(Synthetic, Validation) {
  SynthConfig cfg;
  cfg.classes = 1;
  EXPECT_THROW(generate_bimodal(cfg), Error);
  cfg = SynthConfig{};
  cfg.cluster_spread = 0.0;
  EXPECT_THROW(generate_bimodal(cfg), Error);
  cfg = SynthConfig{};
  cfg.modality_gap = -1.0;
  EXPECT_THROW(generate_bimodal(cfg), Error);
  cfg = SynthConfig{};
  cfg.dim = 3;
  EXPECT_THROW(generate_bimodal(cfg), Error);
}

TEST(Baseline, PicksNearestAnchor) {
  const FeatureMatrix classes(4, 4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});
  const FeatureMatrix images(2, 4, {0, 0, 0, 1, 0, 0, 0, 0.0f});
  // Second image is not a valid embedding but still exercises the tie rule.
  const auto pred = nearest_class_baseline(images, classes);
  EXPECT_EQ(pred[0], 3u);
  EXPECT_EQ(pred[1], 0u);
}

TEST(Baseline, MatchesFullSort) {
  const auto images = testing::random_matrix(150, 12, 1);
  const auto classes = testing::random_matrix(9, 12, 2);
  const auto pred = nearest_class_baseline(images, classes);
  const auto ref = testing::full_sort_knn(images, classes, 1, false);
  for (std::size_t i = 0; i < 150; ++i) EXPECT_EQ(pred[i], ref[i][0].index);
}

TEST(GaussianSourceTest, DeterministicAndInRange) {
  GaussianSource a(7), b(7);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.05);
  EXPECT_NEAR(sq / 20000, 1.0, 0.05);
  GaussianSource u(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform();
    EXPECT_GT(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
}

TEST(GaussianSourceTest, FirstDrawFollowsDocumentedRecipe) {
  std::mt19937_64 engine(11);
  const double u1 = static_cast<double>((engine() >> 11) + 1) * 0x1.0p-53;
  const double u2 = static_cast<double>((engine() >> 11) + 1) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  GaussianSource g(11);
  EXPECT_EQ(g.normal(), r * std::cos(2.0 * std::numbers::pi * u2));
  EXPECT_EQ(g.normal(), r * std::sin(2.0 * std::numbers::pi * u2));
}

}  // namespace
}  // namespace zlap
