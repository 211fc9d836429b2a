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

#ifndef ZLAP_DENSE_ORACLE_HPP
#define ZLAP_DENSE_ORACLE_HPP

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zlap/error.hpp"
#include "zlap/solver.hpp"
#include "zlap/sparse.hpp"

// Dense reference for the label-propagation systems. Only for small graphs:
// tests and the CLI's --oracle mode.

namespace zlap {

inline constexpr std::size_t kDenseOracleLimit = 2000;

inline Eigen::MatrixXd to_dense(const SparseAdjacency& S) {
  if (S.node_count() > kDenseOracleLimit)
    throw Error(ErrorKind::capacity, std::to_string(S.node_count()) +
                                         " nodes exceed the dense limit of " +
                                         std::to_string(kDenseOracleLimit));
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(S.node_count()),
                                                static_cast<Eigen::Index>(S.node_count()));
  for (std::size_t i = 0; i < S.node_count(); ++i) {
    const auto cols = S.row_indices(i);
    const auto vals = S.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p)
      dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[p])) = vals[p];
  }
  return dense;
}

/// I - alpha * S_hat as a dense matrix.
inline Eigen::MatrixXd dense_laplacian(const SparseAdjacency& normalized, double alpha) {
  Eigen::MatrixXd L = -alpha * to_dense(normalized);
  L.diagonal().array() += 1.0;
  return L;
}

/// Solves (I - alpha * S_hat) x = b by dense Cholesky factorization.
inline std::vector<double> dense_solve_oracle(const SparseAdjacency& normalized, double alpha,
                                              std::span<const double> b) {
  if (b.size() != normalized.node_count())
    throw Error(ErrorKind::shape, "right-hand side length does not match node count");
  const Eigen::MatrixXd L = dense_laplacian(normalized, alpha);
  Eigen::LLT<Eigen::MatrixXd> llt(L);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::numerical, "Laplacian is not positive definite");
  const Eigen::VectorXd rhs =
      Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = llt.solve(rhs);
  return {x.data(), x.data() + x.size()};
}

}  // namespace zlap

#endif  // ZLAP_DENSE_ORACLE_HPP
