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

#include <numeric>
#include <random>

#include "test_util.hpp"
#include "zlap/knn.hpp"

namespace zlap {
namespace {

TEST(TopK, SelfSimilarity) {
  const FeatureMatrix v(1, 3, {0.0f, 1.0f, 0.0f});
  const NeighborList nn = top_k(v, v, 1, false);
  ASSERT_EQ(nn.k(), 1u);
  EXPECT_EQ(nn[0][0], (Neighbor{0, 1.0f}));
}

TEST(TopK, OrthogonalTiesBreakByIndex) {
  const FeatureMatrix basis(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const NeighborList nn = top_k(basis, basis, 2, true);
  ASSERT_EQ(nn.k(), 2u);
  EXPECT_EQ(nn[1][0], (Neighbor{0, 0.0f}));
  EXPECT_EQ(nn[1][1], (Neighbor{2, 0.0f}));
}

TEST(TopK, MatchesFullSort) {
  const FeatureMatrix q = testing::random_matrix(200, 16, 1);
  const FeatureMatrix c = testing::random_matrix(300, 16, 2);
  const NeighborList nn = top_k(q, c, 10, false);
  const auto ref = testing::full_sort_knn(q, c, 10, false);
  for (std::size_t i = 0; i < q.rows(); ++i) {
    ASSERT_EQ(nn[i].size(), ref[i].size());
    for (std::size_t r = 0; r < ref[i].size(); ++r) ASSERT_EQ(nn[i][r], ref[i][r]) << i << "," << r;
  }
}

TEST(TopK, MatchesFullSortWithSelfExclusionAcrossBlocks) {
  const FeatureMatrix m = testing::random_matrix(700, 9, 3);
  const NeighborList nn = top_k(m, m, 7, true);
  const auto ref = testing::full_sort_knn(m, m, 7, true);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t r = 0; r < 7; ++r) {
      ASSERT_EQ(nn[i][r], ref[i][r]);
      ASSERT_NE(nn[i][r].index, i);
    }
  }
}

TEST(TopK, DuplicateCandidatesTieByIndex) {
  // Rows 0, 2 and 4 are identical.
  FeatureMatrix c = testing::random_matrix(6, 5, 7);
  for (std::size_t j : {2u, 4u}) std::copy(c.row(0).begin(), c.row(0).end(), c.row(j).begin());
  const FeatureMatrix q(1, 5, std::vector<float>(c.row(0).begin(), c.row(0).end()));
  const NeighborList nn = top_k(q, c, 3, false);
  EXPECT_EQ(nn[0][0].index, 0u);
  EXPECT_EQ(nn[0][1].index, 2u);
  EXPECT_EQ(nn[0][2].index, 4u);
}

TEST(TopK, ClampsKToCandidates) {
  const FeatureMatrix q = testing::random_matrix(4, 8, 1);
  const FeatureMatrix c = testing::random_matrix(3, 8, 2);
  EXPECT_EQ(top_k(q, c, 10, false).k(), 3u);
  EXPECT_EQ(top_k(c, c, 10, true).k(), 2u);
  const FeatureMatrix one = testing::random_matrix(1, 8, 3);
  EXPECT_EQ(top_k(one, one, 5, true).k(), 0u);
}

TEST(TopK, Errors) {
  const FeatureMatrix a = testing::random_matrix(2, 4, 1);
  const FeatureMatrix b = testing::random_matrix(2, 5, 1);
  try {
    top_k(a, b, 1, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
  try {
    top_k(a, FeatureMatrix{}, 1, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_input);
  }
}

TEST(TopK, InvariantsOnRandomInputs) {
  const FeatureMatrix q = testing::random_matrix(120, 24, 5);
  const FeatureMatrix c = testing::random_matrix(400, 24, 6);
  const NeighborList nn = top_k(q, c, 12, false);
  for (std::size_t i = 0; i < q.rows(); ++i) {
    std::vector<std::size_t> seen;
    for (std::size_t r = 0; r < nn.k(); ++r) {
      const Neighbor& n = nn[i][r];
      EXPECT_GE(n.similarity, -1.0f - 1e-5f);
      EXPECT_LE(n.similarity, 1.0f + 1e-5f);
      if (r > 0) {
        EXPECT_TRUE(ranks_before(nn[i][r - 1], n));
      }
      seen.push_back(n.index);
    }
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
  }
}

TEST(TopK, PermutingCandidatesRelabelsIndices) {
  const FeatureMatrix q = testing::random_matrix(50, 12, 8);
  const FeatureMatrix c = testing::random_matrix(260, 12, 9);
  std::vector<std::size_t> perm(c.rows());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  FeatureMatrix permuted(c.rows(), c.dim());
  for (std::size_t j = 0; j < c.rows(); ++j)
    std::copy(c.row(perm[j]).begin(), c.row(perm[j]).end(), permuted.row(j).begin());
  const NeighborList a = top_k(q, c, 6, false);
  const NeighborList b = top_k(q, permuted, 6, false);
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t r = 0; r < 6; ++r) {
      EXPECT_EQ(perm[b[i][r].index], a[i][r].index);
      EXPECT_EQ(b[i][r].similarity, a[i][r].similarity);
    }
}

TEST(TopK, SameResultAtAnyThreadCount) {
  const FeatureMatrix q = testing::random_matrix(300, 20, 10);
  const FeatureMatrix c = testing::random_matrix(500, 20, 11);
  set_thread_count(1);
  const NeighborList one = top_k(q, c, 8, false);
  set_thread_count(4);
  const NeighborList four = top_k(q, c, 8, false);
  set_thread_count(0);
  EXPECT_EQ(one, four);
}

}  // namespace
}  // namespace zlap
