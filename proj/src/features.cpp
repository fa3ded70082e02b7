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

#include "flowseg/features.hpp"

#include <cmath>
#include <stdexcept>

namespace flowseg::features {
namespace {

// Pixel coordinates of a node.
struct NodePos {
    int t, y, x;
};

NodePos locate(const graph::ChainTable& chains, NodeIndex i) {
    const NodeIndex hw = NodeIndex(chains.height) * chains.width;
    const int t = static_cast<int>(i / hw);
    const NodeIndex rem = i % hw;
    return {t, static_cast<int>(rem / chains.width), static_cast<int>(rem % chains.width)};
}

}  // namespace

Channel motion_chain_features(const graph::ChainTable& chains, const io::FlowSet& flows,
                              int steps) {
    if (steps < 1) throw std::invalid_argument("motion_chain_features: steps must be >= 1");
    const NodeIndex n = chains.node_count();
    Channel channel;
    channel.name = "motion";
    channel.data = MatrixX::Zero(n, 4 * steps);

    // The displacement read at a node is the field value stored at its pixel:
    // the forward field of its frame on the forward walk, the backward field
    // into its frame on the backward walk. Frames with no such field read 0.
    for (NodeIndex i = 0; i < n; ++i) {
        NodeIndex cur = i;
        for (int s = 0; s < steps && cur != kNoNode; ++s) {
            const NodePos p = locate(chains, cur);
            if (p.t + 1 < chains.frames) {
                const io::FlowField& field = flows.forward[std::size_t(p.t)];
                channel.data(i, 2 * s) = Real(field.dx(p.y, p.x));
                channel.data(i, 2 * s + 1) = Real(field.dy(p.y, p.x));
            }
            cur = chains.fwd_next[std::size_t(cur)];
        }
        cur = i;
        for (int s = 0; s < steps && cur != kNoNode; ++s) {
            const NodePos p = locate(chains, cur);
            if (p.t > 0) {
                const io::FlowField& field = flows.backward[std::size_t(p.t) - 1];
                channel.data(i, 2 * steps + 2 * s) = Real(field.dx(p.y, p.x));
                channel.data(i, 2 * steps + 2 * s + 1) = Real(field.dy(p.y, p.x));
            }
            cur = chains.bwd_next[std::size_t(cur)];
        }
    }
    return channel;
}

Channel color_features(const io::VideoTensor& video, const graph::ChainTable& chains,
                       int steps, ColorMode mode) {
    if (mode == ColorMode::along_chain && steps < 0)
        throw std::invalid_argument("color_features: steps must be >= 0");
    const NodeIndex n = chains.node_count();
    if (video.node_count() != n)
        throw std::invalid_argument("color_features: video does not match chain table");
    const int c = video.channels;

    Channel channel;
    channel.name = "color";
    if (mode == ColorMode::node_only) {
        channel.data = video.data;
        return channel;
    }

    channel.data = MatrixX::Zero(n, NodeIndex(c) * (2 * steps + 1));
    for (NodeIndex i = 0; i < n; ++i) {
        channel.data.block(i, 0, 1, c) = video.data.row(i);
        NodeIndex cur = i;
        for (int s = 0; s < steps; ++s) {
            cur = chains.fwd_next[std::size_t(cur)];
            if (cur == kNoNode) break;
            channel.data.block(i, NodeIndex(c) * (1 + s), 1, c) = video.data.row(cur);
        }
        cur = i;
        for (int s = 0; s < steps; ++s) {
            cur = chains.bwd_next[std::size_t(cur)];
            if (cur == kNoNode) break;
            channel.data.block(i, NodeIndex(c) * (1 + steps + s), 1, c) = video.data.row(cur);
        }
    }
    return channel;
}

Channel probability_chain_features(const std::vector<ArrayXX>& maps,
                                   const graph::ChainTable& chains, int steps) {
    if (steps < 0) throw std::invalid_argument("probability_chain_features: steps must be >= 0");
    if (static_cast<int>(maps.size()) != chains.frames)
        throw std::invalid_argument("probability_chain_features: need one map per frame");
    for (const auto& map : maps)
        if (map.rows() != chains.height || map.cols() != chains.width)
            throw std::invalid_argument("probability_chain_features: map dimensions differ");

    auto value_at = [&](NodeIndex node) {
        const NodePos p = locate(chains, node);
        return maps[std::size_t(p.t)](p.y, p.x);
    };

    const NodeIndex n = chains.node_count();
    Channel channel;
    channel.name = "prob";
    channel.data = MatrixX::Zero(n, 2 * steps + 1);
    for (NodeIndex i = 0; i < n; ++i) {
        channel.data(i, 0) = value_at(i);
        NodeIndex cur = i;
        for (int s = 0; s < steps; ++s) {
            cur = chains.fwd_next[std::size_t(cur)];
            if (cur == kNoNode) break;
            channel.data(i, 1 + s) = value_at(cur);
        }
        cur = i;
        for (int s = 0; s < steps; ++s) {
            cur = chains.bwd_next[std::size_t(cur)];
            if (cur == kNoNode) break;
            channel.data(i, 1 + steps + s) = value_at(cur);
        }
    }
    return channel;
}

Channel bias_channel(NodeIndex n) {
    Channel channel;
    channel.name = "bias";
    channel.data = MatrixX::Ones(n, 1);
    channel.standardize_exempt = true;
    return channel;
}

FeatureMatrix assemble(const std::vector<Channel>& channels, bool standardize) {
    if (channels.empty()) throw std::invalid_argument("assemble: no channels");
    const NodeIndex n = channels.front().data.rows();
    NodeIndex total = 0;
    for (const auto& channel : channels) {
        if (channel.data.rows() != n)
            throw std::invalid_argument("assemble: row-count mismatch in channel " + channel.name);
        if (!channel.data.allFinite())
            throw std::invalid_argument("assemble: non-finite values in channel " + channel.name);
        total += channel.data.cols();
    }

    FeatureMatrix matrix;
    matrix.data.resize(n, total);
    NodeIndex offset = 0;
    for (const auto& channel : channels) {
        matrix.data.middleCols(offset, channel.data.cols()) = channel.data;
        matrix.layout.push_back({channel.name, static_cast<int>(channel.data.cols())});
        offset += channel.data.cols();
    }

    if (standardize) {
        offset = 0;
        for (const auto& channel : channels) {
            if (!channel.standardize_exempt) {
                for (NodeIndex c = 0; c < channel.data.cols(); ++c) {
                    auto col = matrix.data.col(offset + c);
                    const Real mean = col.mean();
                    const Real var = (col.array() - mean).square().sum() / Real(n);
                    const Real stdev = std::sqrt(var);
                    if (stdev < 1e-12) {
                        col.setZero();  // constant column
                    } else {
                        col = (col.array() - mean) / stdev;
                    }
                }
            }
            offset += channel.data.cols();
        }
        matrix.standardized = true;
    }
    return matrix;
}

FrameBlocks::FrameBlocks(const FeatureMatrix& matrix, int frames, int height, int width)
    : matrix_(&matrix), frames_(frames), rows_per_frame_(NodeIndex(height) * width) {
    if (frames < 1 || height < 1 || width < 1)
        throw std::invalid_argument("frame_blocks: invalid dimensions");
    if (matrix.data.rows() != NodeIndex(frames) * rows_per_frame_)
        throw std::invalid_argument("frame_blocks: row count is not frames*height*width");
}

FrameBlocks frame_blocks(const FeatureMatrix& matrix, int frames, int height, int width) {
    return FrameBlocks(matrix, frames, height, width);
}

}  // namespace flowseg::features
