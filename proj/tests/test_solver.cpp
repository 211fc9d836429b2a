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

#include <cmath>
#include <limits>
#include <random>

#include "test_util.hpp"
#include "zlap/dense_oracle.hpp"
#include "zlap/solver.hpp"

namespace zlap {
namespace {

using testing::dense_of;
using testing::rel_error;

SparseAdjacency empty_graph(std::size_t n) {
  return SparseAdjacency::from_triplets(n, 0, {});
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

Eigen::MatrixXd laplacian_of(const SparseAdjacency& Sh, double alpha) {
  const Eigen::MatrixXd S = dense_of(Sh);
  return Eigen::MatrixXd::Identity(S.rows(), S.cols()) - alpha * S;
}

TEST(LaplacianApply, ZeroAdjacencyIsIdentity) {
  const auto S = empty_graph(4);
  const LaplacianOperator op(S, 0.7);
  const std::vector<double> x = {1.0, -2.0, 3.5, 0.25};
  EXPECT_EQ(op.apply(x), x);
}

TEST(LaplacianApply, SingleOffDiagonal) {
  const auto S = SparseAdjacency::from_triplets(2, 0, {{0, 1, 1.0f}, {1, 0, 1.0f}});
  const LaplacianOperator op(S, 0.3);
  const auto y = op.apply(std::vector<double>{1.0, 0.0});
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_DOUBLE_EQ(y[1], -0.3);
}

TEST(LaplacianApply, MatchesDenseProduct) {
  const auto Sh = normalize_symmetric(testing::random_symmetric(40, 4, 0.15, 2));
  const LaplacianOperator op(Sh, 0.3);
  const auto x = random_vector(40, 3);
  const Eigen::VectorXd want =
      laplacian_of(Sh, 0.3) * Eigen::Map<const Eigen::VectorXd>(x.data(), 40);
  EXPECT_LE(rel_error(op.apply(x), testing::eigen_to_vec(want)), 1e-12);
}

TEST(LaplacianApply, LengthMismatchIsShapeError) {
  const auto S = empty_graph(3);
  const LaplacianOperator op(S, 0.3);
  try {
    op.apply(std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
  EXPECT_THROW(LaplacianOperator(S, 1.0), Error);
  EXPECT_THROW(LaplacianOperator(S, 0.0), Error);
}

TEST(CgSolve, IdentityConvergesInOneIteration) {
  const auto S = empty_graph(5);
  for (double alpha : {0.1, 0.5, 0.9}) {
    const LaplacianOperator op(S, alpha);
    const auto b = random_vector(5, 1);
    const SolveResult r = cg_solve(op, b, SolveConfig{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1u);
    EXPECT_EQ(r.x, b);
  }
}

TEST(CgSolve, HomogeneousSystem) {
  const auto Sh = normalize_symmetric(testing::random_symmetric(20, 2, 0.2, 1));
  const LaplacianOperator op(Sh, 0.3);
  const SolveResult r = cg_solve(op, std::vector<double>(20, 0.0), SolveConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.x, std::vector<double>(20, 0.0));
}

TEST(CgSolve, MatchesDenseInverse) {
  const auto rg = testing::random_bimodal_graph(10, 19, 16, 4);  // N = 200
  const auto& Sh = rg.graph.normalized;
  ASSERT_EQ(Sh.node_count(), 200u);
  const LaplacianOperator op(Sh, 0.3);
  const Eigen::MatrixXd inv = laplacian_of(Sh, 0.3).inverse();
  for (std::size_t c = 0; c < 10; ++c) {
    std::vector<double> e(200, 0.0);
    e[c] = 1.0;
    const SolveResult r = cg_solve(op, e, SolveConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_LE(rel_error(r.x, testing::eigen_to_vec(inv.col(static_cast<Eigen::Index>(c)))), 1e-5);
  }
}

TEST(CgSolve, ResidualContractHolds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto Sh = normalize_symmetric(testing::random_symmetric(80, 5, 0.08, seed));
    for (double alpha : {0.1, 0.5, 0.9}) {
      const LaplacianOperator op(Sh, alpha);
      const auto b = random_vector(80, seed + 17);
      const SolveConfig cfg{1e-8, 1000};
      const SolveResult r = cg_solve(op, b, cfg);
      ASSERT_TRUE(r.converged);
      const auto Lx = op.apply(r.x);
      double res = 0.0, bn = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        res += (Lx[i] - b[i]) * (Lx[i] - b[i]);
        bn += b[i] * b[i];
      }
      EXPECT_LE(std::sqrt(res), cfg.rel_tolerance * std::sqrt(bn));
    }
  }
}

TEST(CgSolve, Linearity) {
  const auto rg = testing::random_bimodal_graph(5, 20, 16, 9);
  const LaplacianOperator op(rg.graph.normalized, 0.5);
  const std::size_t n = op.size();
  const auto b1 = random_vector(n, 1), b2 = random_vector(n, 2);
  const double a = 2.5, c = -0.75;
  std::vector<double> combo(n);
  for (std::size_t i = 0; i < n; ++i) combo[i] = a * b1[i] + c * b2[i];
  const auto x1 = cg_solve(op, b1, SolveConfig{}).x;
  const auto x2 = cg_solve(op, b2, SolveConfig{}).x;
  const auto x = cg_solve(op, combo, SolveConfig{}).x;
  std::vector<double> expected(n);
  for (std::size_t i = 0; i < n; ++i) expected[i] = a * x1[i] + c * x2[i];
  EXPECT_LE(rel_error(x, expected), 1e-5);
}

TEST(CgSolve, InverseIsSymmetric) {
  const auto rg = testing::random_bimodal_graph(4, 10, 16, 12);
  const LaplacianOperator op(rg.graph.normalized, 0.7);
  const std::size_t n = op.size();
  std::vector<std::vector<double>> cols(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    cols[j] = cg_solve(op, e, SolveConfig{1e-10, 1000}).x;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) EXPECT_NEAR(cols[j][i], cols[i][j], 1e-6);
}

TEST(CgSolve, IterationCapReturnsFlaggedIterate) {
  const auto rg = testing::random_bimodal_graph(4, 25, 16, 1);
  const LaplacianOperator op(rg.graph.normalized, 0.9);
  const auto b = random_vector(op.size(), 5);
  const SolveResult r = cg_solve(op, b, SolveConfig{1e-14, 2});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_GT(r.relative_residual, 1e-14);
  EXPECT_LT(r.relative_residual, 1.0);
}

TEST(CgSolve, NonFiniteInputIsNumericalError) {
  const auto S = empty_graph(3);
  const LaplacianOperator op(S, 0.3);
  try {
    cg_solve(op, std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN(), 0.0},
             SolveConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
}

TEST(CgSolve, RejectsBadConfig) {
  const auto S = empty_graph(2);
  const LaplacianOperator op(S, 0.3);
  EXPECT_THROW(cg_solve(op, std::vector<double>{1, 1}, SolveConfig{0.0, 10}), Error);
  EXPECT_THROW(cg_solve(op, std::vector<double>{1}, SolveConfig{}), Error);
}

TEST(DenseOracle, IdentityLaplacian) {
  const auto S = empty_graph(4);
  const std::vector<double> b = {1, 2, 3, 4};
  const auto x = dense_solve_oracle(S, 0.3, b);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(x[i], b[i]);
}

TEST(DenseOracle, SmallResidual) {
  const auto Sh = normalize_symmetric(testing::random_symmetric(5, 1, 0.6, 3));
  const auto b = random_vector(5, 4);
  const auto x = dense_solve_oracle(Sh, 0.3, b);
  const Eigen::VectorXd r = laplacian_of(Sh, 0.3) * Eigen::Map<const Eigen::VectorXd>(x.data(), 5) -
                            Eigen::Map<const Eigen::VectorXd>(b.data(), 5);
  EXPECT_LE(r.norm(), 1e-10);
}

TEST(DenseOracle, AgreesWithCg) {
  const auto rg = testing::random_bimodal_graph(10, 29, 16, 7);  // N = 300
  const LaplacianOperator op(rg.graph.normalized, 0.3);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto b = random_vector(op.size(), s);
    EXPECT_LE(rel_error(cg_solve(op, b, SolveConfig{}).x,
                        dense_solve_oracle(rg.graph.normalized, 0.3, b)),
              1e-5);
  }
}

TEST(DenseOracle, CapacityLimit) {
  const auto S = empty_graph(kDenseOracleLimit + 1);
  try {
    dense_solve_oracle(S, 0.3, std::vector<double>(kDenseOracleLimit + 1, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::capacity);
  }
}

TEST(IterativePropagation, ZeroIterationsReturnsSeed) {
  const auto Sh = normalize_symmetric(testing::random_symmetric(10, 2, 0.3, 1));
  const LaplacianOperator op(Sh, 0.3);
  const auto y = random_vector(10, 2);
  EXPECT_EQ(iterative_propagation(op, y, 0), y);
}

TEST(IterativePropagation, ZeroAdjacencyScalesSeed) {
  const auto S = empty_graph(4);
  const LaplacianOperator op(S, 0.3);
  const std::vector<double> y = {1.0, 0.0, -2.0, 4.0};
  for (std::size_t t : {1u, 5u}) {
    const auto out = iterative_propagation(op, y, t);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(out[i], 0.7 * y[i]);
  }
}

TEST(IterativePropagation, ConvergesToScaledClosedForm) {
  const auto rg = testing::random_bimodal_graph(5, 9, 16, 3);  // N = 50
  const auto& Sh = rg.graph.normalized;
  const LaplacianOperator op(Sh, 0.3);
  for (std::size_t c = 0; c < 5; ++c) {
    std::vector<double> e(Sh.node_count(), 0.0);
    e[c] = 1.0;
    const auto fixed = iterative_propagation(op, e, 2000);
    auto closed = dense_solve_oracle(Sh, 0.3, e);
    for (double& v : closed) v *= 0.7;
    EXPECT_LE(rel_error(fixed, closed), 1e-4);
  }
}

TEST(Laplacian, PositiveDefiniteOnBuiltGraphs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rg = testing::random_bimodal_graph(3, 20, 8, seed);
    for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian_of(rg.graph.normalized, alpha));
      EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - alpha * (1.0 + 1e-6));
    }
  }
}

}  // namespace
}  // namespace zlap
