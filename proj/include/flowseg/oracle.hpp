// Copyright 2026 The flowseg authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "flowseg/core.hpp"
#include "flowseg/graph.hpp"

#include <stdexcept>
#include <vector>

namespace flowseg::oracle {

/// Materialisation guard: refuse to build matrices past this many nodes.
inline constexpr NodeIndex kDefaultSizeCap = 20000;

/// Power iteration cycled without the direction settling (a complex dominant
/// pair); reported distinctly from ordinary failures.
struct OscillationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Explicit n x n adjacency: weight at (i, j) and (j, i) per edge, zero
/// elsewhere including the diagonal.
MatrixX adjacency(const graph::EdgeList& edges, NodeIndex n,
                  NodeIndex cap = kDefaultSizeCap);

/// Ridge hat matrix F (F^T F + beta I)^-1 F^T.
MatrixX projection(const Eigen::Ref<const MatrixX>& F, Real beta);

/// The matrix the propagation/regression/projection cycle applies per
/// iteration to the propagated labels: the plain product M * P.
MatrixX iteration_matrix(const Eigen::Ref<const MatrixX>& M,
                         const Eigen::Ref<const MatrixX>& P);

/// M + 4 alpha^2 F (alpha F^T F + beta I)^-1 F^T, the matrix whose dominant
/// eigenvector solves the coupled clustering-plus-regression objective.
MatrixX coupled_matrix(const Eigen::Ref<const MatrixX>& M,
                       const Eigen::Ref<const MatrixX>& F, Real alpha, Real beta);

/// Fixed-point iteration on the coupled stationarity system:
///   w = 2 alpha (alpha F^T F + beta I)^-1 F^T x
///   x <- (M x + 2 alpha F w) / ||M x + 2 alpha F w||_2
VectorX coupled_iteration(const Eigen::Ref<const MatrixX>& M,
                          const Eigen::Ref<const MatrixX>& F, Real alpha, Real beta,
                          const Eigen::Ref<const VectorX>& x0, int iterations);

/// Ridge-optimal coefficients for the coupled objective at a given x.
VectorX coupled_regression(const Eigen::Ref<const MatrixX>& F, Real alpha, Real beta,
                           const Eigen::Ref<const VectorX>& x);

struct EigenPair {
    Real value = 0.0;
    VectorX vector;
    int iterations = 0;
    bool converged = false;
};

/// L2-normalised power iteration; sign fixed so the vector sums >= 0 and
/// value = v^T A v. Throws OscillationError when the direction change stops
/// improving for 50 consecutive iterations without reaching tol.
EigenPair dominant_eigenpair(const Eigen::Ref<const MatrixX>& A, int max_iterations,
                             Real tol, const VectorX* start = nullptr);

/// Block-diagonal stack of per-frame feature blocks, n x (d * m).
MatrixX block_diagonal(const std::vector<MatrixX>& blocks);

/// x^T M x - alpha (F w - x)^T (F w - x) - beta w^T w.
Real objective_score(const Eigen::Ref<const MatrixX>& M, const Eigen::Ref<const MatrixX>& F,
                     const Eigen::Ref<const VectorX>& x, const Eigen::Ref<const VectorX>& w,
                     Real alpha, Real beta);

}  // namespace flowseg::oracle
