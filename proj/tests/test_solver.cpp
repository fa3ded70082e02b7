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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flowseg/oracle.hpp"
#include "flowseg/solver.hpp"
#include "support.hpp"

using namespace flowseg;
using namespace flowseg::solver;

namespace {

struct SmallProblem {
    io::SynthSequence seq;
    Problem problem;
    SolverConfig config;
};

SmallProblem make_problem(int frames, int side, std::uint64_t seed,
                          RegressionMode mode = RegressionMode::per_frame) {
    SmallProblem sp;
    sp.seq = io::synth_sequence(test::small_instance(frames, side, seed));
    sp.config.radius = 3;
    sp.config.chain_steps = 3;
    sp.config.regression = mode;
    sp.problem = build_problem(sp.seq.video, sp.seq.flows, sp.config);
    return sp;
}

// Dense projection matching the configured regression mode.
MatrixX dense_projection(const Problem& problem, const SolverConfig& config) {
    if (config.regression == RegressionMode::global)
        return oracle::projection(problem.feature_matrix.data, config.beta);
    const features::FrameBlocks blocks = features::frame_blocks(
        problem.feature_matrix, problem.frames, problem.height, problem.width);
    std::vector<MatrixX> list;
    for (int t = 0; t < blocks.frame_count(); ++t) list.emplace_back(blocks.block(t));
    return oracle::projection(oracle::block_diagonal(list), config.beta);
}

}  // namespace

TEST_CASE("init_mask schemes") {
    const VectorX uniform = init_mask({InitKind::uniform}, 2, 3, 3);
    CHECK(uniform.size() == 18);
    CHECK(uniform.isApproxToConstant(1.0));

    InitScheme gaussian;
    gaussian.kind = InitKind::gaussian;
    gaussian.sigma = 1.0;
    const VectorX g = init_mask(gaussian, 1, 3, 3);
    CHECK(g[4] == 1.0);                                       // centre (1,1)
    CHECK(g[1] == doctest::Approx(std::exp(-0.5)));           // edge-adjacent
    CHECK(g[0] == doctest::Approx(std::exp(-1.0)));           // corner

    InitScheme random;
    random.kind = InitKind::random;
    random.seed = 99;
    const VectorX r1 = init_mask(random, 2, 4, 4);
    const VectorX r2 = init_mask(random, 2, 4, 4);
    CHECK(r1 == r2);
    CHECK(r1.minCoeff() >= 0.0);
    CHECK(r1.maxCoeff() < 1.0);

    InitScheme external;
    external.kind = InitKind::external;
    external.external = {ArrayXX::Constant(2, 2, 0.25), ArrayXX::Constant(2, 2, 0.75)};
    const VectorX e = init_mask(external, 2, 2, 2);
    CHECK(e.head(4).isApproxToConstant(0.25));
    CHECK(e.tail(4).isApproxToConstant(0.75));

    external.external.pop_back();
    CHECK_THROWS_AS(init_mask(external, 2, 2, 2), std::invalid_argument);
}

TEST_CASE("ridge_solve closed forms") {
    MatrixX F(2, 1);
    F << 1, 2;
    VectorX x(2);
    x << 1, 2;
    // 1-d normal equations: w = F.x / (F.F + beta)
    CHECK(ridge_solve(F, x, 1.0)[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(ridge_solve(F, VectorX::Zero(2), 1.0)[0] == 0.0);

    // orthonormal columns, vanishing ridge: w -> F^T x
    MatrixX Q(2, 2);
    Q << 1, 0, 0, 1;
    VectorX t(2);
    t << 3, -4;
    const VectorX w = ridge_solve(Q, t, 1e-12);
    CHECK(w[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(w[1] == doctest::Approx(-4.0).epsilon(1e-9));

    CHECK_THROWS_AS(ridge_solve(F, x, 0.0), std::invalid_argument);
}

TEST_CASE("ridge_solve residual stays within the solver guarantee") {
    RandomSource rng(17);
    MatrixX F(40, 7);
    for (Eigen::Index i = 0; i < F.size(); ++i) F.data()[i] = rng.next() * 2.0 - 1.0;
    VectorX x(40);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.next();
    for (Real beta : {1e-6, 1.0, 50.0}) {
        const VectorX w = ridge_solve(F, x, beta);
        const MatrixX gram = F.transpose() * F + beta * MatrixX::Identity(7, 7);
        const VectorX rhs = F.transpose() * x;
        CHECK((gram * w - rhs).norm() <= 1e-8 * rhs.norm());
    }
}

TEST_CASE("step with identity features nearly reproduces propagation") {
    // d = n: F = I makes the projection a uniform shrink by 1/(1+beta)
    SmallProblem sp = make_problem(3, 6, 1, RegressionMode::global);
    const NodeIndex n = sp.problem.edges.node_count;
    sp.problem.feature_matrix.data = MatrixX::Identity(n, n);
    sp.problem.feature_matrix.layout = {{"identity", int(n)}};
    sp.config.beta = 1e-10;

    const VectorX x0 = init_mask({InitKind::uniform}, 3, 6, 6);
    const StepResult result = step(sp.problem, x0, sp.config);
    CHECK((result.next - result.propagated / (1.0 + sp.config.beta)).cwiseAbs().maxCoeff() <=
          1e-6);
}

TEST_CASE("step fails loudly when propagation annihilates the mask") {
    SmallProblem sp = make_problem(3, 6, 2);
    sp.problem.edges.edges.clear();
    const VectorX x0 = init_mask({InitKind::uniform}, 3, 6, 6);
    CHECK_THROWS_WITH_AS(step(sp.problem, x0, sp.config), doctest::Contains("no positive mass"),
                         std::runtime_error);
}

TEST_CASE("the propagated sequence advances by the dense coupled operator") {
    for (auto mode : {RegressionMode::per_frame, RegressionMode::global}) {
        SmallProblem sp = make_problem(5, 8, 3, mode);
        const MatrixX M = oracle::adjacency(sp.problem.edges, sp.problem.edges.node_count);
        const MatrixX A = oracle::iteration_matrix(M, dense_projection(sp.problem, sp.config));

        VectorX x = init_mask({InitKind::gaussian}, 5, 8, 8);
        VectorX previous;
        for (int it = 0; it < 6; ++it) {
            const StepResult stepped = step(sp.problem, x, sp.config);
            if (it > 0) CHECK(cosine(stepped.propagated, A * previous) >= 1.0 - 1e-8);
            previous = stepped.propagated;
            x = stepped.next;
        }
    }
}

TEST_CASE("iterate respects the iteration budget") {
    SmallProblem sp = make_problem(3, 6, 4);
    const VectorX x0 = init_mask({InitKind::gaussian}, 3, 6, 6);

    SolverConfig one = sp.config;
    one.iterations = 1;
    const RunResult first = iterate(sp.problem, one, x0);
    CHECK(first.mask.iteration == 1);
    const StepResult direct = step(sp.problem, x0, sp.config);
    CHECK((first.mask.values - direct.next).cwiseAbs().maxCoeff() == 0.0);

    SolverConfig zero = sp.config;
    zero.iterations = 0;
    CHECK_THROWS_AS(iterate(sp.problem, zero, x0), std::invalid_argument);
}

TEST_CASE("iterate is bit-reproducible in deterministic mode") {
    SmallProblem sp = make_problem(4, 8, 5);
    sp.config.iterations = 7;
    InitScheme random;
    random.kind = InitKind::random;
    random.seed = 11;
    const VectorX x0 = init_mask(random, 4, 8, 8);
    const RunResult a = iterate(sp.problem, sp.config, x0);
    const RunResult b = iterate(sp.problem, sp.config, x0);
    CHECK(a.mask.values == b.mask.values);
    CHECK(a.diagnostics.propagated_direction == b.diagnostics.propagated_direction);
}

TEST_CASE("iterates are invariant to positive scaling of the start") {
    SmallProblem sp = make_problem(4, 8, 6);
    sp.config.iterations = 5;
    const VectorX x0 = init_mask({InitKind::gaussian}, 4, 8, 8);
    const RunResult base = iterate(sp.problem, sp.config, x0);
    const RunResult scaled = iterate(sp.problem, sp.config, VectorX(137.0 * x0));
    CHECK((base.mask.values - scaled.mask.values).cwiseAbs().maxCoeff() <=
          1e-12 * base.mask.values.cwiseAbs().maxCoeff());
}

TEST_CASE("per-frame mode equals global mode on the block feature matrix") {
    for (std::uint64_t seed : {1, 2, 3}) {
        SmallProblem sp = make_problem(3, 6, seed, RegressionMode::per_frame);

        const features::FrameBlocks blocks = features::frame_blocks(
            sp.problem.feature_matrix, sp.problem.frames, sp.problem.height, sp.problem.width);
        std::vector<MatrixX> list;
        for (int t = 0; t < blocks.frame_count(); ++t) list.emplace_back(blocks.block(t));
        Problem block_problem = sp.problem;
        block_problem.feature_matrix.data = oracle::block_diagonal(list);
        block_problem.feature_matrix.layout = {{"blocks", int(block_problem.feature_matrix.data.cols())}};
        SolverConfig global = sp.config;
        global.regression = RegressionMode::global;

        VectorX xa = init_mask({InitKind::gaussian}, 3, 6, 6);
        VectorX xb = xa;
        for (int it = 0; it < 6; ++it) {
            xa = step(sp.problem, xa, sp.config).next;
            xb = step(block_problem, xb, global).next;
            const Real scale = xa.cwiseAbs().maxCoeff();
            REQUIRE((xa - xb).cwiseAbs().maxCoeff() <= 1e-8 * scale);
        }
    }
}

TEST_CASE("run converges to the dominant eigenvector direction") {
    const auto spec = test::small_instance(5, 8, 7);
    const auto seq = io::synth_sequence(spec);
    SolverConfig config;
    config.radius = 3;
    config.chain_steps = 3;
    config.iterations = 50;
    config.tol = 0.0;
    const RunResult result = run(seq.video, seq.flows, config);

    const Problem problem = build_problem(seq.video, seq.flows, config);
    const MatrixX M = oracle::adjacency(problem.edges, problem.edges.node_count);
    const MatrixX A = oracle::iteration_matrix(M, dense_projection(problem, config));
    const oracle::EigenPair pair = oracle::dominant_eigenpair(A, 500, 1e-16);
    CHECK(cosine(result.diagnostics.propagated_direction, pair.vector) >= 1.0 - 1e-6);
}

TEST_CASE("all admissible initialisations converge to one direction") {
    const auto seq = io::synth_sequence(test::small_instance(5, 8, 8));
    SolverConfig config;
    config.radius = 3;
    config.chain_steps = 3;
    config.iterations = 60;
    config.tol = 0.0;

    std::vector<VectorX> finals;
    for (InitKind kind : {InitKind::gaussian, InitKind::uniform, InitKind::random}) {
        config.init.kind = kind;
        config.init.seed = 5;
        finals.push_back(run(seq.video, seq.flows, config).mask.values);
    }
    config.init.kind = InitKind::external;
    config.init.external.assign(5, ArrayXX::Constant(8, 8, 0.5));
    config.init.external[2](4, 4) = 1.0;  // arbitrary informative bump
    finals.push_back(run(seq.video, seq.flows, config).mask.values);

    for (std::size_t a = 0; a < finals.size(); ++a)
        for (std::size_t b = a + 1; b < finals.size(); ++b)
            CHECK(std::abs(cosine(finals[a], finals[b])) >= 1.0 - 1e-4);
}

TEST_CASE("diagnostics expose direction changes and negativity") {
    SmallProblem sp = make_problem(4, 8, 9);
    sp.config.iterations = 6;
    sp.config.record_rayleigh = true;
    const VectorX x0 = init_mask({InitKind::gaussian}, 4, 8, 8);
    const RunResult result = iterate(sp.problem, sp.config, x0);
    REQUIRE(!result.diagnostics.iterations.empty());
    for (const auto& stats : result.diagnostics.iterations) {
        CHECK(stats.direction_change >= 0.0);
        CHECK(stats.propagation_peak > 0.0);
        REQUIRE(stats.rayleigh.has_value());
        CHECK(*stats.rayleigh > 0.0);
    }
    // direction changes shrink as the iteration settles
    CHECK(result.diagnostics.iterations.back().direction_change <
          result.diagnostics.iterations.front().direction_change);
}

TEST_CASE("finalize_mask rescales into the unit interval") {
    VectorX x(3);
    x << -1, 0, 3;
    const VectorX scaled = finalize_mask(x);
    CHECK(scaled[0] == 0.0);
    CHECK(scaled[1] == doctest::Approx(0.25));
    CHECK(scaled[2] == 1.0);

    // sign ambiguity resolved: x and -x finalize identically
    const VectorX flipped = finalize_mask(VectorX(-x));
    CHECK((scaled - flipped).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_WITH_AS(finalize_mask(VectorX::Constant(4, 2.0)), doctest::Contains("range"),
                         std::runtime_error);
}

TEST_CASE("binarize applies the >= threshold per pixel") {
    SoftMask mask;
    mask.frames = 1;
    mask.height = 1;
    mask.width = 3;
    mask.values.resize(3);
    mask.values << 0.4999, 0.5, 1.0;
    const auto frames = binarize(mask, 0.5);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0](0, 0) == false);
    CHECK(frames[0](0, 1) == true);  // exactly at the threshold counts
    CHECK(frames[0](0, 2) == true);

    mask.values.setZero();
    CHECK_FALSE(binarize(mask, 0.5)[0].any());

    mask.values << 0.2, 0.4, 1.0;
    const auto top = binarize(mask, 0.999);
    CHECK(top[0].count() == 1);
    CHECK(top[0](0, 2));

    CHECK_THROWS_AS(binarize(mask, 1.0), std::invalid_argument);
}
