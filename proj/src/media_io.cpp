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

#include "flowseg/media_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

static_assert(std::endian::native == std::endian::little,
              "flo codec assumes a little-endian host");

namespace flowseg::io {
namespace {

constexpr float kFloMagic = 202021.25f;

struct PnmImage {
    int width = 0;
    int height = 0;
    int channels = 0;  // 1 (P5) or 3 (P6)
    std::vector<std::uint8_t> bytes;  // row-major, interleaved channels
};

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

// Skips whitespace and '#' comment lines between header tokens.
void skip_pnm_separators(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

int read_pnm_int(std::istream& in, const std::filesystem::path& path) {
    skip_pnm_separators(in);
    int value = -1;
    if (!(in >> value) || value < 0) fail(path, "malformed header");
    return value;
}

PnmImage read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    PnmImage img;
    if (magic[0] == 'P' && magic[1] == '5') {
        img.channels = 1;
    } else if (magic[0] == 'P' && magic[1] == '6') {
        img.channels = 3;
    } else {
        fail(path, "not a binary PGM/PPM (want P5 or P6)");
    }
    img.width = read_pnm_int(in, path);
    img.height = read_pnm_int(in, path);
    const int maxval = read_pnm_int(in, path);
    if (maxval != 255) fail(path, "unsupported maxval " + std::to_string(maxval));
    in.get();  // single whitespace byte before the payload
    if (!in) fail(path, "malformed header");
    const std::size_t count =
        std::size_t(img.width) * std::size_t(img.height) * std::size_t(img.channels);
    img.bytes.resize(count);
    in.read(reinterpret_cast<char*>(img.bytes.data()), std::streamsize(count));
    if (std::size_t(in.gcount()) != count) fail(path, "truncated payload");
    return img;
}

void write_pnm(const PnmImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.bytes.data()),
              std::streamsize(img.bytes.size()));
    if (!out) fail(path, "write failed");
}

std::uint8_t quantize(Real value) {
    // round-half-up keeps golden files stable
    return static_cast<std::uint8_t>(std::floor(value * 255.0 + 0.5));
}

}  // namespace

VideoTensor read_frames(const std::vector<std::filesystem::path>& paths) {
    if (paths.empty()) throw std::invalid_argument("read_frames: empty file list");
    VideoTensor video;
    for (std::size_t t = 0; t < paths.size(); ++t) {
        PnmImage img = read_pnm(paths[t]);
        if (t == 0) {
            video.frames = static_cast<int>(paths.size());
            video.height = img.height;
            video.width = img.width;
            video.channels = img.channels;
            video.data.resize(video.node_count(), video.channels);
        } else if (img.width != video.width || img.height != video.height ||
                   img.channels != video.channels) {
            fail(paths[t], "dimension mismatch across frames");
        }
        const NodeIndex base = NodeIndex(t) * video.height * video.width;
        for (NodeIndex p = 0; p < NodeIndex(video.height) * video.width; ++p)
            for (int c = 0; c < video.channels; ++c)
                video.data(base + p, c) = Real(img.bytes[p * video.channels + c]) / 255.0;
    }
    return video;
}

ArrayXX read_pgm(const std::filesystem::path& path) {
    PnmImage img = read_pnm(path);
    if (img.channels != 1) fail(path, "expected single-channel PGM");
    ArrayXX field(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            field(y, x) = Real(img.bytes[std::size_t(y) * img.width + x]) / 255.0;
    return field;
}

FlowField read_flo(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    float magic = 0.0f;
    std::int32_t width = 0, height = 0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&width), 4);
    in.read(reinterpret_cast<char*>(&height), 4);
    if (!in) fail(path, "truncated header");
    if (magic != kFloMagic) fail(path, "wrong magic value");
    if (width <= 0 || height <= 0) fail(path, "invalid dimensions");
    FlowField field;
    field.width = width;
    field.height = height;
    field.uv.resize(NodeIndex(width) * height, 2);
    std::vector<float> row(std::size_t(width) * 2);
    for (int y = 0; y < height; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size() * 4));
        if (std::size_t(in.gcount()) != row.size() * 4)
            fail(path, "payload shorter than header promises");
        for (int x = 0; x < width; ++x) {
            field.uv(NodeIndex(y) * width + x, 0) = row[std::size_t(x) * 2];
            field.uv(NodeIndex(y) * width + x, 1) = row[std::size_t(x) * 2 + 1];
        }
    }
    if (in.get() != std::ifstream::traits_type::eof())
        fail(path, "payload longer than header promises");
    return field;
}

void write_flo(const FlowField& field, const std::filesystem::path& path) {
    if (!field.uv.allFinite())
        throw std::invalid_argument("write_flo: field contains non-finite values");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    const std::int32_t width = field.width;
    const std::int32_t height = field.height;
    out.write(reinterpret_cast<const char*>(&kFloMagic), 4);
    out.write(reinterpret_cast<const char*>(&width), 4);
    out.write(reinterpret_cast<const char*>(&height), 4);
    std::vector<float> row(std::size_t(width) * 2);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            row[std::size_t(x) * 2] = field.uv(NodeIndex(y) * width + x, 0);
            row[std::size_t(x) * 2 + 1] = field.uv(NodeIndex(y) * width + x, 1);
        }
        out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size() * 4));
    }
    if (!out) fail(path, "write failed");
}

void write_mask_pgm(const ArrayXX& mask, const std::filesystem::path& path) {
    if ((mask < 0.0).any() || (mask > 1.0).any() || !mask.allFinite())
        throw std::invalid_argument("write_mask_pgm: values must lie in [0, 1]");
    PnmImage img;
    img.width = static_cast<int>(mask.cols());
    img.height = static_cast<int>(mask.rows());
    img.channels = 1;
    img.bytes.resize(std::size_t(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            img.bytes[std::size_t(y) * img.width + x] = quantize(mask(y, x));
    write_pnm(img, path);
}

void write_frame(const VideoTensor& video, int t, const std::filesystem::path& path) {
    if (t < 0 || t >= video.frames)
        throw std::invalid_argument("write_frame: frame index out of range");
    PnmImage img;
    img.width = video.width;
    img.height = video.height;
    img.channels = video.channels;
    img.bytes.resize(std::size_t(img.width) * img.height * img.channels);
    const NodeIndex base = NodeIndex(t) * video.height * video.width;
    for (NodeIndex p = 0; p < NodeIndex(video.height) * video.width; ++p)
        for (int c = 0; c < video.channels; ++c)
            img.bytes[std::size_t(p) * img.channels + c] = quantize(video.data(base + p, c));
    write_pnm(img, path);
}

std::vector<ArrayXX> read_probability_maps(const std::vector<std::filesystem::path>& paths,
                                           int frames, int height, int width) {
    if (static_cast<int>(paths.size()) != frames)
        throw std::runtime_error("read_probability_maps: expected " + std::to_string(frames) +
                                 " files, got " + std::to_string(paths.size()));
    std::vector<ArrayXX> maps;
    maps.reserve(paths.size());
    for (const auto& path : paths) {
        ArrayXX field = read_pgm(path);
        if (field.rows() != height || field.cols() != width)
            fail(path, "dimensions do not match the video");
        maps.push_back(std::move(field));
    }
    return maps;
}

namespace {

// Object centre at frame t.
std::pair<double, double> object_centre(const SynthSpec& spec, int t) {
    return {spec.start_x + t * spec.vel_x, spec.start_y + t * spec.vel_y};
}

bool inside_object(const SynthSpec& spec, double cx, double cy, int x, int y) {
    if (spec.shape == SynthSpec::Shape::square) {
        const double half = spec.size / 2.0;
        return x >= cx - half && x < cx + half && y >= cy - half && y < cy + half;
    }
    const double r = spec.size / 2.0;
    const double dx = x - cx;
    const double dy = y - cy;
    return dx * dx + dy * dy < r * r;
}

int wrap(long v, int extent) {
    long r = v % extent;
    if (r < 0) r += extent;
    return static_cast<int>(r);
}

}  // namespace

MaskArray synth_object_mask(const SynthSpec& spec, int t) {
    auto [cx, cy] = object_centre(spec, t);
    MaskArray mask(spec.height, spec.width);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            mask(y, x) = inside_object(spec, cx, cy, x, y);
    return mask;
}

SynthSequence synth_sequence(const SynthSpec& spec) {
    if (spec.frames < 2) throw std::invalid_argument("synth_sequence: need at least 2 frames");
    if (spec.height < 1 || spec.width < 1)
        throw std::invalid_argument("synth_sequence: empty frame");
    if (spec.size > spec.width || spec.size > spec.height)
        throw std::invalid_argument("synth_sequence: object larger than frame");
    if (spec.channels != 1 && spec.channels != 3)
        throw std::invalid_argument("synth_sequence: channels must be 1 or 3");

    SynthSequence seq;
    seq.truth.kind = GroundTruth::Kind::masks;
    for (int t = 0; t < spec.frames; ++t) {
        MaskArray mask = synth_object_mask(spec, t);
        if (!mask.any())
            throw std::invalid_argument("synth_sequence: object leaves the frame at t=" +
                                        std::to_string(t));
        seq.truth.masks.push_back(std::move(mask));
    }

    // Textures: a background canvas sampled with wraparound drift and an
    // object patch anchored to the object centre. Distinct value ranges keep
    // colour features informative.
    RandomSource rng(spec.seed);
    const int patch = static_cast<int>(std::ceil(spec.size)) + 2;
    ArrayXX bg_tex(spec.height * spec.channels, spec.width);
    for (int i = 0; i < bg_tex.rows(); ++i)
        for (int j = 0; j < bg_tex.cols(); ++j)
            bg_tex(i, j) = rng.next(0.0, 0.55);
    ArrayXX obj_tex(patch * spec.channels, patch);
    for (int i = 0; i < obj_tex.rows(); ++i)
        for (int j = 0; j < obj_tex.cols(); ++j)
            obj_tex(i, j) = rng.next(0.45, 1.0);

    VideoTensor& video = seq.video;
    video.frames = spec.frames;
    video.height = spec.height;
    video.width = spec.width;
    video.channels = spec.channels;
    video.data.resize(video.node_count(), video.channels);
    for (int t = 0; t < spec.frames; ++t) {
        auto [cx, cy] = object_centre(spec, t);
        const long bg_off_x = std::lround(t * spec.bg_vel_x);
        const long bg_off_y = std::lround(t * spec.bg_vel_y);
        const MaskArray& mask = seq.truth.masks[std::size_t(t)];
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                const NodeIndex node = video.node(t, y, x);
                for (int c = 0; c < spec.channels; ++c) {
                    if (mask(y, x)) {
                        const int ox = wrap(std::lround(x - cx + patch / 2.0), patch);
                        const int oy = wrap(std::lround(y - cy + patch / 2.0), patch);
                        video.data(node, c) = obj_tex(oy * spec.channels + c, ox);
                    } else {
                        const int bx = wrap(x - bg_off_x, spec.width);
                        const int by = wrap(y - bg_off_y, spec.height);
                        video.data(node, c) = bg_tex(by * spec.channels + c, bx);
                    }
                }
            }
        }
    }

    for (int t = 0; t + 1 < spec.frames; ++t) {
        FlowField fwd, bwd;
        fwd.height = bwd.height = spec.height;
        fwd.width = bwd.width = spec.width;
        fwd.uv.resize(NodeIndex(spec.height) * spec.width, 2);
        bwd.uv.resize(NodeIndex(spec.height) * spec.width, 2);
        const MaskArray& mask_t = seq.truth.masks[std::size_t(t)];
        const MaskArray& mask_next = seq.truth.masks[std::size_t(t) + 1];
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                const NodeIndex p = NodeIndex(y) * spec.width + x;
                if (mask_t(y, x)) {
                    fwd.uv(p, 0) = float(spec.vel_x);
                    fwd.uv(p, 1) = float(spec.vel_y);
                } else {
                    fwd.uv(p, 0) = float(spec.bg_vel_x);
                    fwd.uv(p, 1) = float(spec.bg_vel_y);
                }
                if (mask_next(y, x)) {
                    bwd.uv(p, 0) = float(-spec.vel_x);
                    bwd.uv(p, 1) = float(-spec.vel_y);
                } else {
                    bwd.uv(p, 0) = float(-spec.bg_vel_x);
                    bwd.uv(p, 1) = float(-spec.bg_vel_y);
                }
            }
        }
        seq.flows.forward.push_back(std::move(fwd));
        seq.flows.backward.push_back(std::move(bwd));
    }
    return seq;
}

}  // namespace flowseg::io
