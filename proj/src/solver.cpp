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

#include "flowseg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowseg::solver {

VectorX init_mask(const InitScheme& scheme, int frames, int height, int width) {
    if (frames < 1 || height < 1 || width < 1)
        throw std::invalid_argument("init_mask: invalid dimensions");
    const NodeIndex hw = NodeIndex(height) * width;
    const NodeIndex n = NodeIndex(frames) * hw;
    VectorX x(n);
    switch (scheme.kind) {
        case InitKind::uniform:
            x.setOnes();
            break;
        case InitKind::gaussian: {
            const Real sigma =
                scheme.sigma > 0 ? scheme.sigma : 0.25 * std::min(height, width);
            const Real cy = (height - 1) / 2.0;
            const Real cx = (width - 1) / 2.0;
            VectorX frame(hw);
            for (int y = 0; y < height; ++y)
                for (int xp = 0; xp < width; ++xp)
                    frame[NodeIndex(y) * width + xp] = std::exp(
                        -((y - cy) * (y - cy) + (xp - cx) * (xp - cx)) / (2.0 * sigma * sigma));
            for (int t = 0; t < frames; ++t) x.segment(NodeIndex(t) * hw, hw) = frame;
            break;
        }
        case InitKind::random: {
            RandomSource rng(scheme.seed);
            for (NodeIndex i = 0; i < n; ++i) x[i] = rng.next();
            break;
        }
        case InitKind::external: {
            if (static_cast<int>(scheme.external.size()) != frames)
                throw std::invalid_argument("init_mask: need one external field per frame");
            for (int t = 0; t < frames; ++t) {
                const ArrayXX& field = scheme.external[std::size_t(t)];
                if (field.rows() != height || field.cols() != width)
                    throw std::invalid_argument("init_mask: external field dimensions differ");
                for (int y = 0; y < height; ++y)
                    for (int xp = 0; xp < width; ++xp)
                        x[NodeIndex(t) * hw + NodeIndex(y) * width + xp] = field(y, xp);
            }
            break;
        }
    }
    return x;
}

VectorX ridge_solve(const Eigen::Ref<const MatrixX>& F,
                    const Eigen::Ref<const VectorX>& targets, Real beta) {
    if (beta <= 0) throw std::invalid_argument("ridge_solve: beta must be positive");
    if (F.rows() != targets.size())
        throw std::invalid_argument("ridge_solve: row count does not match targets");
    if (!F.allFinite() || !targets.allFinite())
        throw std::invalid_argument("ridge_solve: non-finite input");
    const Eigen::Index d = F.cols();
    MatrixX gram = F.transpose() * F + beta * MatrixX::Identity(d, d);
    return gram.ldlt().solve(F.transpose() * targets);
}

namespace {

// Ridge factorisations for the active regression mode, built once per run
// and reused by every iteration.
class RegressionEngine {
public:
    RegressionEngine(const Problem& problem, const SolverConfig& config)
        : problem_(problem), config_(config) {
        const features::FeatureMatrix& F = problem.feature_matrix;
        const int d = F.dim();
        if (config.regression == RegressionMode::global) {
            factorizations_.emplace_back(
                MatrixX(F.data.transpose() * F.data + config.beta * MatrixX::Identity(d, d)));
        } else {
            blocks_.emplace(features::frame_blocks(F, problem.frames, problem.height,
                                                   problem.width));
            for (int t = 0; t < problem.frames; ++t) {
                const MatrixX block = blocks_->block(t);
                factorizations_.emplace_back(
                    MatrixX(block.transpose() * block + config.beta * MatrixX::Identity(d, d)));
            }
       }
    }

    // Regresses the targets and projects them back through the features.
    void project(const VectorX& targets, VectorX& projected, MatrixX* coefficients) const {
        const features::FeatureMatrix& F = problem_.feature_matrix;
        if (config_.regression == RegressionMode::global) {
            const VectorX w = factorizations_[0].solve(F.data.transpose() * targets);
            projected = F.data * w;
            if (coefficients) *coefficients = w;
        } else {
            const NodeIndex hw = blocks_->rows_per_frame();
            projected.resize(targets.size());
            if (coefficients) coefficients->resize(F.dim(), problem_.frames);
            for (int t = 0; t < problem_.frames; ++t) {
                const auto block = blocks_->block(t);
                const VectorX w = factorizations_[std::size_t(t)].solve(
                    block.transpose() * targets.segment(NodeIndex(t) * hw, hw));
                projected.segment(NodeIndex(t) * hw, hw) = block * w;
                if (coefficients) coefficients->col(t) = w;
            }
        }
    }

    StepResult advance(const Eigen::Ref<const VectorX>& x) const {
        StepResult result;
        result.propagated = graph::propagate(problem_.edges, x, config_.shards);
        result.propagation_peak = result.propagated.maxCoeff();
        if (result.propagation_peak <= 0.0)
            throw std::runtime_error(
                "step: propagation left no positive mass (empty graph or zero mask)");
        result.propagated /= result.propagation_peak;
        result.model.mode = config_.regression;
        result.model.beta = config_.beta;
        project(result.propagated, result.next, &result.model.coefficients);
        return result;
    }

    // x^T (M P x) / x^T x without materialising either operator.
    Real rayleigh(const VectorX& x) const {
        const Real denom = x.squaredNorm();
        if (denom == 0) return 0.0;
        VectorX projected;
        project(x, projected, nullptr);
        return x.dot(graph::propagate(problem_.edges, projected, config_.shards)) / denom;
    }

private:
    const Problem& problem_;
    const SolverConfig& config_;
    std::optional<features::FrameBlocks> blocks_;
    std::vector<Eigen::LDLT<MatrixX>> factorizations_;
};

}  // namespace

StepResult step(const Problem& problem, const Eigen::Ref<const VectorX>& x,
                const SolverConfig& config) {
    if (x.size() != problem.feature_matrix.rows() || x.size() != problem.edges.node_count)
        throw std::invalid_argument("step: dimensions disagree");
    return RegressionEngine(problem, config).advance(x);
}

RunResult iterate(const Problem& problem, const SolverConfig& config, const VectorX& x0) {
    if (config.iterations < 1)
        throw std::invalid_argument("iterate: iteration budget must be >= 1");
    if (!x0.allFinite()) throw std::invalid_argument("iterate: non-finite start");
    if (x0.size() != problem.feature_matrix.rows() || x0.size() != problem.edges.node_count)
        throw std::invalid_argument("iterate: dimensions disagree");

    const RegressionEngine engine(problem, config);
    RunResult result;
    VectorX x = x0;
    for (int it = 0; it < config.iterations; ++it) {
        StepResult stepped = engine.advance(x);
        IterationStats stats;
        stats.direction_change = direction_change(stepped.next, x);
        stats.propagation_peak = stepped.propagation_peak;
        stats.min_label = stepped.next.minCoeff();
        if (config.record_rayleigh) stats.rayleigh = engine.rayleigh(stepped.next);
        x = std::move(stepped.next);
        result.diagnostics.propagated_direction = std::move(stepped.propagated);
        result.diagnostics.iterations.push_back(stats);
        result.mask.iteration = it + 1;
        if (stats.direction_change < config.tol) {
            result.diagnostics.converged = true;
            break;
        }
    }
    const Real norm = result.diagnostics.propagated_direction.norm();
    if (norm > 0) result.diagnostics.propagated_direction /= norm;
    result.mask.values = std::move(x);
    result.mask.frames = problem.frames;
    result.mask.height = problem.height;
    result.mask.width = problem.width;
    return result;
}

features::FeatureMatrix build_features(const io::VideoTensor& video, const io::FlowSet& flows,
                                       const graph::ChainTable& chains,
                                       const SolverConfig& config, const RunInputs& inputs) {
    std::vector<features::Channel> channels;
    for (const std::string& name : config.channels) {
        if (name == "motion") {
            channels.push_back(
                features::motion_chain_features(chains, flows, config.chain_steps));
        } else if (name == "color") {
            channels.push_back(features::color_features(video, chains, config.chain_steps,
                                                        features::ColorMode::node_only));
        } else if (name == "color-chain") {
            channels.push_back(features::color_features(video, chains, config.chain_steps,
                                                        features::ColorMode::along_chain));
        } else if (name == "prob") {
            if (inputs.probability_maps.empty())
                throw std::invalid_argument(
                    "build_features: 'prob' channel requested without probability maps");
            channels.push_back(features::probability_chain_features(
                inputs.probability_maps, chains, config.chain_steps));
        } else if (name == "bias") {
            channels.push_back(features::bias_channel(video.node_count()));
        } else {
            throw std::invalid_argument("build_features: unknown channel '" + name + "'");
        }
    }
    return features::assemble(channels, config.standardize);
}

Problem build_problem(const io::VideoTensor& video, const io::FlowSet& flows,
                      const SolverConfig& config, const RunInputs& inputs) {
    if (video.frames < 2) throw std::invalid_argument("build_problem: need at least 2 frames");
    if (flows.frame_count() != video.frames)
        throw std::invalid_argument("build_problem: flow pair count does not match frames");

    Problem problem;
    problem.frames = video.frames;
    problem.height = video.height;
    problem.width = video.width;
    problem.chains = graph::build_chains(flows);
    if (problem.chains.height != video.height || problem.chains.width != video.width)
        throw std::invalid_argument("build_problem: flow dimensions do not match frames");
    problem.edges = graph::build_edges(problem.chains, config.radius, config.sigma_k);
    problem.feature_matrix = build_features(video, flows, problem.chains, config, inputs);
    return problem;
}

RunResult run(const io::VideoTensor& video, const io::FlowSet& flows,
              const SolverConfig& config, const RunInputs& inputs) {
    Problem problem = build_problem(video, flows, config, inputs);
    VectorX x0 = init_mask(config.init, video.frames, video.height, video.width);
    return iterate(problem, config, x0);
}

VectorX finalize_mask(const Eigen::Ref<const VectorX>& x) {
    if (!x.allFinite()) throw std::invalid_argument("finalize_mask: non-finite labels");
    VectorX out = x.sum() < 0 ? VectorX(-x) : VectorX(x);
    const Real lo = out.minCoeff();
    const Real hi = out.maxCoeff();
    if (hi == lo) throw std::runtime_error("finalize_mask: constant labels have no range");
    out.array() -= lo;
    out /= (hi - lo);
    return out;
}

std::vector<MaskArray> binarize(const SoftMask& mask, Real threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("binarize: threshold must lie in (0, 1)");
    std::vector<MaskArray> frames;
    frames.reserve(std::size_t(mask.frames));
    for (int t = 0; t < mask.frames; ++t) {
        MaskArray frame(mask.height, mask.width);
        auto view = mask.frame(t);
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x) frame(y, x) = view(y, x) >= threshold;
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace flowseg::solver
