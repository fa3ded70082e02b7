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
#include "flowseg/features.hpp"
#include "flowseg/graph.hpp"
#include "flowseg/media_io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace flowseg::solver {

enum class InitKind { gaussian, uniform, random, external };

struct InitScheme {
    InitKind kind = InitKind::gaussian;
    Real sigma = -1.0;             // gaussian std dev in pixels; <0 -> 0.25*min(h,w)
    std::uint64_t seed = 0;        // random init
    std::vector<ArrayXX> external; // per-frame fields for external init
};

enum class RegressionMode { per_frame, global };

struct SolverConfig {
    int radius = 5;
    Real sigma_k = 2.0;
    Real beta = 1.0;
    int iterations = 7;
    Real tol = 1e-6;
    InitScheme init;
    RegressionMode regression = RegressionMode::per_frame;
    int chain_steps = 5;  // nodes visited per direction for chain features
    std::vector<std::string> channels = {"motion", "color"};
    bool standardize = true;
    Real threshold = 0.5;  // binarisation level, in (0, 1)
    int shards = 1;        // propagation shards; any fixed value is reproducible
    bool record_rayleigh = false;
};

/// Label vector over all video pixels with per-frame views.
struct SoftMask {
    VectorX values;
    int frames = 0;
    int height = 0;
    int width = 0;
    int iteration = 0;  // iterations run to produce it

    using FrameView =
        Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    FrameView frame(int t) const {
        return FrameView(values.data() + NodeIndex(t) * height * width, height, width);
    }
};

/// Ridge coefficients from the regression step; one column per frame in
/// per-frame mode, a single column in global mode.
struct RegressionModel {
    RegressionMode mode = RegressionMode::global;
    MatrixX coefficients;
    Real beta = 0.0;
};

struct IterationStats {
    Real direction_change = 0.0;  // 1 - |cos| between consecutive label iterates
    Real propagation_peak = 0.0;  // max of the raw propagated vector
    Real min_label = 0.0;         // most negative label after projection
    std::optional<Real> rayleigh; // x^T M P x / x^T x, when recorded
};

struct Diagnostics {
    std::vector<IterationStats> iterations;
    /// Final propagated labels, L2-normalised. One iteration maps this
    /// sequence exactly by M*P, so equivalence checks against the dense
    /// operator compare here.
    VectorX propagated_direction;
    bool converged = false;
};

/// Everything the iteration needs, assembled once per clip.
struct Problem {
    graph::ChainTable chains;
    graph::EdgeList edges;
    features::FeatureMatrix feature_matrix;
    int frames = 0;
    int height = 0;
    int width = 0;
};

/// Optional per-frame inputs for the probability channel and external init.
struct RunInputs {
    std::vector<ArrayXX> probability_maps;
};

struct RunResult {
    SoftMask mask;
    Diagnostics diagnostics;
};

VectorX init_mask(const InitScheme& scheme, int frames, int height, int width);

/// Solves (F^T F + beta I) w = F^T targets by LDLT; never forms an inverse.
VectorX ridge_solve(const Eigen::Ref<const MatrixX>& F,
                    const Eigen::Ref<const VectorX>& targets, Real beta);

struct StepResult {
    VectorX next;                 // labels after regression + projection
    VectorX propagated;           // propagated labels after max-normalisation
    Real propagation_peak = 0.0;  // max of the raw propagated vector
    RegressionModel model;
};

/// One propagation / max-normalisation / regression / projection cycle.
/// Throws when propagation leaves no positive mass to normalise.
StepResult step(const Problem& problem, const Eigen::Ref<const VectorX>& x,
                const SolverConfig& config);

/// Runs the iteration from x0 until the iteration budget or the direction
/// change drops below tol.
RunResult iterate(const Problem& problem, const SolverConfig& config, const VectorX& x0);

/// Assembles the feature matrix for the channels named in the config.
features::FeatureMatrix build_features(const io::VideoTensor& video, const io::FlowSet& flows,
                                       const graph::ChainTable& chains,
                                       const SolverConfig& config,
                                       const RunInputs& inputs = {});

/// Builds chains, edges and features for a clip according to the config.
Problem build_problem(const io::VideoTensor& video, const io::FlowSet& flows,
                      const SolverConfig& config, const RunInputs& inputs = {});

/// build_problem + init_mask + iterate. The returned mask is not yet range
/// normalised; see finalize_mask.
RunResult run(const io::VideoTensor& video, const io::FlowSet& flows,
              const SolverConfig& config, const RunInputs& inputs = {});

/// Orients the labels so they sum >= 0, then min-max scales to [0, 1].
/// Throws on a constant vector.
VectorX finalize_mask(const Eigen::Ref<const VectorX>& x);

/// Per-frame boolean masks: pixel = value >= threshold.
std::vector<MaskArray> binarize(const SoftMask& mask, Real threshold);

}  // namespace flowseg::solver
