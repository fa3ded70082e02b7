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
#include "flowseg/media_io.hpp"

#include <vector>

namespace flowseg::graph {

/// Per-node successor links obtained by following the per-pair flows one
/// frame at a time. kNoNode marks a chain that exits the frame (targets are
/// rounded to the nearest pixel, halves away from zero) or the clip.
struct ChainTable {
    int frames = 0;
    int height = 0;
    int width = 0;
    std::vector<NodeIndex> fwd_next;  // successor in frame t+1
    std::vector<NodeIndex> bwd_next;  // successor in frame t-1

    NodeIndex node_count() const { return NodeIndex(frames) * height * width; }
    NodeIndex node(int t, int y, int x) const {
        return (NodeIndex(t) * height + y) * width + x;
    }
    int frame_of(NodeIndex i) const {
        return static_cast<int>(i / (NodeIndex(height) * width));
    }
};

/// Undirected weighted edge, canonically oriented i < j.
struct Edge {
    NodeIndex i;
    NodeIndex j;
    Real weight;
};

/// Deduplicated edge set realising the chain adjacency within a temporal
/// radius; the adjacency matrix itself is never materialised here.
struct EdgeList {
    std::vector<Edge> edges;
    int radius = 0;
    Real sigma_k = 0.0;
    NodeIndex node_count = 0;
};

enum class Direction { forward, backward };

/// Gaussian kernel of the temporal distance, exp(-dt^2 / (2 sigma_k^2)).
Real temporal_kernel(int dt, Real sigma_k);

ChainTable build_chains(const io::FlowSet& flows);

/// Follows successor links from `start` up to `steps` times, stopping early
/// when a link is missing. The start node is not part of the result.
std::vector<NodeIndex> chain_walk(const ChainTable& chains, NodeIndex start,
                                  Direction direction, int steps);

/// Collects every node pair connected by a chain walk of at most `radius`
/// steps in either direction, weighted by the temporal kernel. Pairs reached
/// along several chains or from both endpoints appear exactly once.
EdgeList build_edges(const ChainTable& chains, int radius, Real sigma_k);

/// y = M x without materialising M: every edge contributes weight*x_j to
/// slot i and weight*x_i to slot j. With shards > 1 the edge list is split
/// into contiguous ranges accumulated independently and merged in shard
/// order, which is reproducible across runs for a fixed shard count.
VectorX propagate(const EdgeList& edges, const Eigen::Ref<const VectorX>& x, int shards = 1);

}  // namespace flowseg::graph
