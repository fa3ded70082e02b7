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

#include "flowseg/oracle.hpp"

#include <cmath>
#include <string>

namespace flowseg::oracle {

MatrixX adjacency(const graph::EdgeList& edges, NodeIndex n, NodeIndex cap) {
    if (n > cap)
        throw std::invalid_argument("adjacency: " + std::to_string(n) +
                                    " nodes exceeds the materialisation cap of " +
                                    std::to_string(cap));
    MatrixX M = MatrixX::Zero(n, n);
    for (const auto& edge : edges.edges) {
        M(edge.i, edge.j) = edge.weight;
        M(edge.j, edge.i) = edge.weight;
    }
    return M;
}

MatrixX projection(const Eigen::Ref<const MatrixX>& F, Real beta) {
    if (beta <= 0) throw std::invalid_argument("projection: beta must be positive");
    const Eigen::Index d = F.cols();
    MatrixX gram = F.transpose() * F + beta * MatrixX::Identity(d, d);
    return F * gram.ldlt().solve(MatrixX(F.transpose()));
}

MatrixX iteration_matrix(const Eigen::Ref<const MatrixX>& M,
                         const Eigen::Ref<const MatrixX>& P) {
    if (M.cols() != P.rows())
        throw std::invalid_argument("iteration_matrix: size mismatch");
    return M * P;
}

MatrixX coupled_matrix(const Eigen::Ref<const MatrixX>& M,
                       const Eigen::Ref<const MatrixX>& F, Real alpha, Real beta) {
    if (alpha <= 0 || beta <= 0)
        throw std::invalid_argument("coupled_matrix: alpha and beta must be positive");
    const Eigen::Index d = F.cols();
    MatrixX gram = alpha * (F.transpose() * F) + beta * MatrixX::Identity(d, d);
    return M + 4.0 * alpha * alpha * (F * gram.ldlt().solve(MatrixX(F.transpose())));
}

VectorX coupled_regression(const Eigen::Ref<const MatrixX>& F, Real alpha, Real beta,
                           const Eigen::Ref<const VectorX>& x) {
    const Eigen::Index d = F.cols();
    MatrixX gram = alpha * (F.transpose() * F) + beta * MatrixX::Identity(d, d);
    return 2.0 * alpha * gram.ldlt().solve(F.transpose() * x);
}

VectorX coupled_iteration(const Eigen::Ref<const MatrixX>& M,
                          const Eigen::Ref<const MatrixX>& F, Real alpha, Real beta,
                          const Eigen::Ref<const VectorX>& x0, int iterations) {
    if (M.rows() != M.cols() || M.rows() != x0.size() ||
        (F.size() > 0 && F.rows() != x0.size()))
        throw std::invalid_argument("coupled_iteration: size mismatch");
    VectorX x = x0;
    for (int it = 0; it < iterations; ++it) {
        VectorX update = M * x;
        if (F.size() > 0) {
            VectorX w = coupled_regression(F, alpha, beta, x);
            update += 2.0 * alpha * (F * w);
        }
        const Real norm = update.norm();
        if (norm == 0.0)
            throw std::runtime_error("coupled_iteration: zero-norm update at iteration " +
                                     std::to_string(it));
        x = update / norm;
    }
    return x;
}

EigenPair dominant_eigenpair(const Eigen::Ref<const MatrixX>& A, int max_iterations,
                             Real tol, const VectorX* start) {
    if (A.rows() != A.cols() || A.rows() == 0)
        throw std::invalid_argument("dominant_eigenpair: matrix must be square and nonempty");
    if (A.isZero(0.0))
        throw std::invalid_argument("dominant_eigenpair: zero matrix");

    const Eigen::Index n = A.rows();
    VectorX v = start != nullptr ? *start : VectorX::Ones(n);
    if (v.size() != n || v.norm() == 0.0)
        throw std::invalid_argument("dominant_eigenpair: bad start vector");
    v.normalize();

    EigenPair result;
    Real best_delta = std::numeric_limits<Real>::infinity();
    int since_improvement = 0;
    for (int it = 0; it < max_iterations; ++it) {
        VectorX next = A * v;
        const Real norm = next.norm();
        if (norm == 0.0)
            throw std::runtime_error("dominant_eigenpair: iterate annihilated");
        next /= norm;
        const Real delta = direction_change(next, v);
        v = next;
        result.iterations = it + 1;
        if (delta < tol) {
            result.converged = true;
            break;
        }
        // No steady progress over a long window means the direction is
        // cycling (complex dominant pair); refuse to report an eigenpair.
        if (delta < best_delta * (1.0 - 1e-12)) {
            best_delta = delta;
            since_improvement = 0;
        } else if (++since_improvement >= 50) {
            throw OscillationError(
                "dominant_eigenpair: direction change stopped decreasing after " +
                std::to_string(it + 1) + " iterations (delta " + std::to_string(delta) + ")");
        }
    }
    if (v.sum() < 0) v = -v;
    result.value = v.dot(A * v);
    result.vector = std::move(v);
    return result;
}

MatrixX block_diagonal(const std::vector<MatrixX>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("block_diagonal: no blocks");
    const Eigen::Index d = blocks.front().cols();
    Eigen::Index rows = 0;
    for (const auto& block : blocks) {
        if (block.cols() != d)
            throw std::invalid_argument("block_diagonal: blocks must share a column count");
        rows += block.rows();
    }
    MatrixX out = MatrixX::Zero(rows, d * Eigen::Index(blocks.size()));
    Eigen::Index row = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        out.block(row, d * Eigen::Index(b), blocks[b].rows(), d) = blocks[b];
        row += blocks[b].rows();
    }
    return out;
}

Real objective_score(const Eigen::Ref<const MatrixX>& M, const Eigen::Ref<const MatrixX>& F,
                     const Eigen::Ref<const VectorX>& x, const Eigen::Ref<const VectorX>& w,
                     Real alpha, Real beta) {
    const VectorX residual = F * w - x;
    return x.dot(M * x) - alpha * residual.squaredNorm() - beta * w.squaredNorm();
}

}  // namespace flowseg::oracle
