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

#include "flowseg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace flowseg::graph {

Real temporal_kernel(int dt, Real sigma_k) {
    if (sigma_k <= 0) throw std::invalid_argument("temporal_kernel: sigma_k must be positive");
    const Real d = Real(dt);
    return std::exp(-(d * d) / (2.0 * sigma_k * sigma_k));
}

ChainTable build_chains(const io::FlowSet& flows) {
    if (flows.forward.empty() || flows.forward.size() != flows.backward.size())
        throw std::invalid_argument("build_chains: need m-1 forward and m-1 backward fields");
    const int h = flows.forward.front().height;
    const int w = flows.forward.front().width;
    for (const auto* list : {&flows.forward, &flows.backward})
        for (const auto& field : *list) {
            if (field.height != h || field.width != w)
                throw std::invalid_argument("build_chains: field dimensions differ");
            if (!field.uv.allFinite())
                throw std::invalid_argument("build_chains: non-finite displacement");
        }

    ChainTable chains;
    chains.frames = flows.frame_count();
    chains.height = h;
    chains.width = w;
    const NodeIndex n = chains.node_count();
    chains.fwd_next.assign(std::size_t(n), kNoNode);
    chains.bwd_next.assign(std::size_t(n), kNoNode);

    // lround rounds halves away from zero on both axes.
    auto target = [&](const io::FlowField& field, int y, int x) -> std::pair<long, long> {
        return {std::lround(double(x) + double(field.dx(y, x))),
                std::lround(double(y) + double(field.dy(y, x)))};
    };

    for (int t = 0; t + 1 < chains.frames; ++t) {
        const io::FlowField& fwd = flows.forward[std::size_t(t)];
        const io::FlowField& bwd = flows.backward[std::size_t(t)];
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                auto [fx, fy] = target(fwd, y, x);
                if (fx >= 0 && fx < w && fy >= 0 && fy < h)
                    chains.fwd_next[std::size_t(chains.node(t, y, x))] =
                        chains.node(t + 1, int(fy), int(fx));
                auto [bx, by] = target(bwd, y, x);
                if (bx >= 0 && bx < w && by >= 0 && by < h)
                    chains.bwd_next[std::size_t(chains.node(t + 1, y, x))] =
                        chains.node(t, int(by), int(bx));
            }
        }
    }
    return chains;
}

std::vector<NodeIndex> chain_walk(const ChainTable& chains, NodeIndex start,
                                  Direction direction, int steps) {
    if (steps < 0) throw std::invalid_argument("chain_walk: steps must be >= 0");
    const auto& next =
        direction == Direction::forward ? chains.fwd_next : chains.bwd_next;
    std::vector<NodeIndex> visited;
    visited.reserve(std::size_t(steps));
    NodeIndex cur = start;
    for (int s = 0; s < steps; ++s) {
        cur = next[std::size_t(cur)];
        if (cur == kNoNode) break;
        visited.push_back(cur);
    }
    return visited;
}

EdgeList build_edges(const ChainTable& chains, int radius, Real sigma_k) {
    if (radius < 1) throw std::invalid_argument("build_edges: radius must be >= 1");
    if (sigma_k <= 0) throw std::invalid_argument("build_edges: sigma_k must be positive");

    const NodeIndex n = chains.node_count();
    std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
    pairs.reserve(std::size_t(2) * std::size_t(n));
    for (NodeIndex i = 0; i < n; ++i) {
        for (Direction dir : {Direction::forward, Direction::backward}) {
            const auto& next =
                dir == Direction::forward ? chains.fwd_next : chains.bwd_next;
            NodeIndex cur = i;
            for (int s = 0; s < radius; ++s) {
                cur = next[std::size_t(cur)];
                if (cur == kNoNode) break;
                pairs.emplace_back(std::min(i, cur), std::max(i, cur));
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    // Kernel values depend only on the temporal distance; cache per dt.
    std::vector<Real> kernel_at(std::size_t(radius) + 1, 0.0);
    for (int dt = 1; dt <= radius; ++dt)
        kernel_at[std::size_t(dt)] = temporal_kernel(dt, sigma_k);

    EdgeList list;
    list.radius = radius;
    list.sigma_k = sigma_k;
    list.node_count = n;
    list.edges.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        const int dt = chains.frame_of(j) - chains.frame_of(i);
        list.edges.push_back({i, j, kernel_at[std::size_t(dt)]});
    }
    return list;
}

namespace {

void accumulate(const std::vector<Edge>& edges, std::size_t begin, std::size_t end,
                const Eigen::Ref<const VectorX>& x, VectorX& out) {
    for (std::size_t e = begin; e < end; ++e) {
        const Edge& edge = edges[e];
        out[edge.i] += edge.weight * x[edge.j];
        out[edge.j] += edge.weight * x[edge.i];
    }
}

}  // namespace

VectorX propagate(const EdgeList& edges, const Eigen::Ref<const VectorX>& x, int shards) {
    if (x.size() != edges.node_count)
        throw std::invalid_argument("propagate: vector length does not match node count");
    if (!x.allFinite()) throw std::invalid_argument("propagate: non-finite input");

    VectorX result = VectorX::Zero(x.size());
    const std::size_t count = edges.edges.size();
    if (shards <= 1 || count < 4096) {
        accumulate(edges.edges, 0, count, x, result);
        return result;
    }

    const std::size_t used = std::min<std::size_t>(std::size_t(shards), count);
    std::vector<VectorX> partial(used, VectorX::Zero(x.size()));
    std::vector<std::thread> workers;
    workers.reserve(used);
    for (std::size_t s = 0; s < used; ++s) {
        const std::size_t begin = count * s / used;
        const std::size_t end = count * (s + 1) / used;
        workers.emplace_back([&, s, begin, end] {
            accumulate(edges.edges, begin, end, x, partial[s]);
        });
    }
    for (auto& worker : workers) worker.join();
    for (std::size_t s = 0; s < used; ++s) result += partial[s];
    return result;
}

}  // namespace flowseg::graph
