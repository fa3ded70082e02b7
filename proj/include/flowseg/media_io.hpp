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

#include <filesystem>
#include <optional>
#include <vector>

namespace flowseg::io {

/// Decoded frame stack. Row i of `data` holds the colour of the pixel with
/// linear index i = t*h*w + y*w + x, one column per channel, values in [0, 1].
struct VideoTensor {
    int frames = 0;
    int height = 0;
    int width = 0;
    int channels = 0;
    MatrixX data;  // (frames*height*width) x channels

    NodeIndex node_count() const { return NodeIndex(frames) * height * width; }
    NodeIndex node(int t, int y, int x) const {
        return (NodeIndex(t) * height + y) * width + x;
    }
};

/// Displacement field for one frame pair; row y*w+x holds (dx, dy) in pixels.
/// Stored as float32, the precision of the interchange format, so file round
/// trips are bit-exact.
struct FlowField {
    int height = 0;
    int width = 0;
    Eigen::Matrix<float, Eigen::Dynamic, 2> uv;  // (height*width) x 2

    float dx(int y, int x) const { return uv(NodeIndex(y) * width + x, 0); }
    float dy(int y, int x) const { return uv(NodeIndex(y) * width + x, 1); }
};

/// forward[t] maps frame t -> t+1; backward[t] maps frame t+1 -> t.
struct FlowSet {
    std::vector<FlowField> forward;
    std::vector<FlowField> backward;

    int frame_count() const { return static_cast<int>(forward.size()) + 1; }
};

/// Inclusive pixel bounding box.
struct Box {
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;
};

struct GroundTruth {
    enum class Kind { masks, boxes };
    Kind kind = Kind::masks;
    std::vector<MaskArray> masks;               // per frame (height x width)
    std::vector<std::optional<Box>> boxes;      // per frame
};

/// Reads binary PPM (P6) / PGM (P5) frames, one file per frame, all sharing
/// dimensions and channel count. Intensities are raw byte / 255.
VideoTensor read_frames(const std::vector<std::filesystem::path>& paths);

/// Reads a single 8-bit PGM as a (height x width) array of byte/255 values.
ArrayXX read_pgm(const std::filesystem::path& path);

/// Reads one displacement field in the little-endian .flo interchange layout:
/// float32 magic 202021.25, int32 width, int32 height, then row-major
/// interleaved (dx, dy) float32 pairs.
FlowField read_flo(const std::filesystem::path& path);

/// Inverse of read_flo; rejects non-finite fields before touching the file.
void write_flo(const FlowField& field, const std::filesystem::path& path);

/// Writes a [0,1] field as binary PGM with byte = round-half-up(value * 255).
void write_mask_pgm(const ArrayXX& mask, const std::filesystem::path& path);

/// Writes frame t of the video as P6 (3 channels) or P5 (1 channel),
/// quantised with round-half-up.
void write_frame(const VideoTensor& video, int t, const std::filesystem::path& path);

/// Reads per-frame foreground probability maps (8-bit PGM, byte/255). The
/// file list must have exactly `frames` entries of size height x width.
std::vector<ArrayXX> read_probability_maps(const std::vector<std::filesystem::path>& paths,
                                           int frames, int height, int width);

/// Synthetic clip: a textured object translating over a textured, drifting
/// background, with analytically exact flows and per-frame masks.
struct SynthSpec {
    enum class Shape { square, disc };
    Shape shape = Shape::square;
    double size = 8.0;     // square side / disc diameter, pixels
    double start_x = 0.0;  // object centre at frame 0
    double start_y = 0.0;
    double vel_x = 0.0;    // object translation per frame
    double vel_y = 0.0;
    double bg_vel_x = 0.0;  // background translation per frame
    double bg_vel_y = 0.0;
    int frames = 0;
    int height = 0;
    int width = 0;
    int channels = 3;
    std::uint64_t seed = 0;
};

struct SynthSequence {
    VideoTensor video;
    FlowSet flows;
    GroundTruth truth;
};

/// Footprint of the object at frame t, from the spec alone (used both by the
/// generator and by tests that reason about occlusion strips).
MaskArray synth_object_mask(const SynthSpec& spec, int t);

SynthSequence synth_sequence(const SynthSpec& spec);

}  // namespace flowseg::io
