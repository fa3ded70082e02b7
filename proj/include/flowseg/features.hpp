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
#include "flowseg/media_io.hpp"

#include <string>
#include <vector>

namespace flowseg::features {

/// One named group of feature columns, n rows.
struct Channel {
    std::string name;
    MatrixX data;
    bool standardize_exempt = false;  // e.g. bias column
};

struct ChannelInfo {
    std::string name;
    int width = 0;
};

/// Node descriptor matrix; row i describes the pixel with linear index i.
struct FeatureMatrix {
    MatrixX data;
    std::vector<ChannelInfo> layout;
    bool standardized = false;

    NodeIndex rows() const { return data.rows(); }
    int dim() const { return static_cast<int>(data.cols()); }
};

/// Displacements read while walking `steps` nodes along each outgoing chain
/// (the node itself first), forward half then backward half, width 4*steps.
/// Slots beyond a terminated chain are zero; a node with no stored field in
/// a direction (last frame forward, first frame backward) reads (0, 0).
Channel motion_chain_features(const graph::ChainTable& chains, const io::FlowSet& flows,
                              int steps);

enum class ColorMode { node_only, along_chain };

/// node_only: the pixel's own colour (width = channel count).
/// along_chain: node colour, then colours at `steps` forward-chain nodes,
/// then `steps` backward-chain nodes, zero-padded at termination.
Channel color_features(const io::VideoTensor& video, const graph::ChainTable& chains,
                       int steps, ColorMode mode);

/// Foreground probability at the node, then along the forward and backward
/// chains (width 2*steps + 1), zero-padded at termination.
Channel probability_chain_features(const std::vector<ArrayXX>& maps,
                                   const graph::ChainTable& chains, int steps);

/// Constant-one column, exempt from standardization.
Channel bias_channel(NodeIndex n);

/// Horizontal concatenation in the declared order. With standardize, every
/// non-exempt column is shifted and scaled to zero mean and unit population
/// variance; constant columns become all zeros.
FeatureMatrix assemble(const std::vector<Channel>& channels, bool standardize);

/// Per-frame row-block view of F: block t covers rows [t*h*w, (t+1)*h*w).
class FrameBlocks {
public:
    FrameBlocks(const FeatureMatrix& matrix, int frames, int height, int width);

    int frame_count() const { return frames_; }
    NodeIndex rows_per_frame() const { return rows_per_frame_; }

    Eigen::Block<const MatrixX> block(int t) const {
        return matrix_->data.middleRows(NodeIndex(t) * rows_per_frame_, rows_per_frame_);
    }

    const FeatureMatrix& matrix() const { return *matrix_; }

private:
    const FeatureMatrix* matrix_;
    int frames_;
    NodeIndex rows_per_frame_;
};

FrameBlocks frame_blocks(const FeatureMatrix& matrix, int frames, int height, int width);

}  // namespace flowseg::features
