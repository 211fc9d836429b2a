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

#ifndef ZLAP_SOLVER_HPP
#define ZLAP_SOLVER_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "zlap/error.hpp"
#include "zlap/sparse.hpp"

namespace zlap {

struct SolveConfig {
  double rel_tolerance = 1e-6;
  std::size_t max_iterations = 1000;

  void validate() const {
    if (!(rel_tolerance > 0.0))
      throw Error(ErrorKind::validation, "relative tolerance must be positive");
  }
};

/// L = I - alpha * S_hat, applied without materializing L. Keeps a
/// reference to the normalized adjacency, which must outlive the operator.
class LaplacianOperator {
 public:
  LaplacianOperator(const SparseAdjacency& normalized, double alpha)
      : adjacency_(&normalized), alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw Error(ErrorKind::validation, "alpha must lie in (0, 1)");
  }

  std::size_t size() const noexcept { return adjacency_->node_count(); }
  std::size_t class_count() const noexcept { return adjacency_->class_count(); }
  double alpha() const noexcept { return alpha_; }
  const SparseAdjacency& adjacency() const noexcept { return *adjacency_; }

  /// y = x - alpha * (S_hat x).
  void apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != size() || y.size() != size())
      throw Error(ErrorKind::shape, "operator of size " + std::to_string(size()) +
                                        " applied to vector of length " +
                                        std::to_string(x.size()));
    adjacency_->multiply(x, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - alpha_ * y[i];
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(x.size());
    apply(x, y);
    return y;
  }

 private:
  const SparseAdjacency* adjacency_;
  double alpha_;
};

struct SolveResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;  // ||L x - b|| / ||b||, recomputed from x
  bool converged = false;
};

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double true_residual(const LaplacianOperator& op, std::span<const double> x,
                            std::span<const double> b, std::span<double> r) {
  op.apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return std::sqrt(dot(r, r));
}
}  // namespace detail

/// Conjugate gradient from x = 0. Stops when the explicitly recomputed
/// residual satisfies ||L x - b|| <= tol * ||b||; otherwise returns the
/// iterate with the smallest residual after max_iterations.
inline SolveResult cg_solve(const LaplacianOperator& op, std::span<const double> b,
                            const SolveConfig& cfg) {
  cfg.validate();
  const std::size_t n = op.size();
  if (b.size() != n)
    throw Error(ErrorKind::shape, "right-hand side length " + std::to_string(b.size()) +
                                      " != operator size " + std::to_string(n));
  SolveResult result;
  result.x.assign(n, 0.0);
  const double b_norm = std::sqrt(detail::dot(b, b));
  if (!std::isfinite(b_norm)) throw Error(ErrorKind::numerical, "right-hand side is not finite");
  if (b_norm == 0.0) {
    result.converged = true;
    return result;
  }
  const double target = cfg.rel_tolerance * b_norm;

  std::vector<double> r(b.begin(), b.end()), p = r, q(n), best = result.x;
  double rs = detail::dot(r, r);
  double best_residual = b_norm;
  std::vector<double>& x = result.x;

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    op.apply(p, q);
    const double pq = detail::dot(p, q);
    if (!std::isfinite(pq) || pq <= 0.0)
      throw Error(ErrorKind::numerical, "conjugate gradient broke down at iteration " +
                                            std::to_string(it));
    const double step = rs / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * q[i];
    }
    const double rs_next = detail::dot(r, r);
    if (!std::isfinite(rs_next))
      throw Error(ErrorKind::numerical, "NaN in conjugate gradient at iteration " +
                                            std::to_string(it));
    result.iterations = it;
    if (std::sqrt(rs_next) <= target) {
      // The recursive residual can drift; confirm against b - L x and
      // restart from the true residual if it has.
      const double actual = detail::true_residual(op, x, b, q);
      if (actual <= target) {
        result.relative_residual = actual / b_norm;
        result.converged = true;
        return result;
      }
      r = q;
      p = r;
      rs = detail::dot(r, r);
      continue;
    }
    const double beta = rs_next / rs;
    rs = rs_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    if (std::sqrt(rs) < best_residual) {
      best_residual = std::sqrt(rs);
      best = x;
    }
  }
  result.x = std::move(best);
  result.relative_residual = detail::true_residual(op, result.x, b, q) / b_norm;
  result.converged = result.relative_residual <= cfg.rel_tolerance;
  return result;
}

/// Runs y(t+1) = alpha * S_hat * y(t) + (1 - alpha) * y from y(0) = y.
/// The fixed point is (1 - alpha) * L^{-1} y.
inline std::vector<double> iterative_propagation(const LaplacianOperator& op,
                                                 std::span<const double> y,
                                                 std::size_t iterations) {
  if (y.size() != op.size()) throw Error(ErrorKind::shape, "seed length != operator size");
  std::vector<double> current(y.begin(), y.end()), next(y.size());
  const double alpha = op.alpha();
  for (std::size_t t = 0; t < iterations; ++t) {
    op.adjacency().multiply(current, next);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = alpha * next[i] + (1.0 - alpha) * y[i];
    current.swap(next);
  }
  return current;
}

}  // namespace zlap

#endif  // ZLAP_SOLVER_HPP
