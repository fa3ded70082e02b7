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
#include "flowseg/oracle.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

namespace flowseg::test {

/// Temporary directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("flowseg_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::vector<char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

/// A small moving-square clip with exact flows; the default small instance
/// for solver and oracle tests.
inline io::SynthSpec small_instance(int frames = 5, int side = 8, std::uint64_t seed = 0) {
    io::SynthSpec spec;
    spec.frames = frames;
    spec.height = side;
    spec.width = side;
    spec.shape = io::SynthSpec::Shape::square;
    spec.size = 3;
    spec.start_x = 2.0;
    spec.start_y = side / 2.0;
    spec.vel_x = 1.0;
    spec.vel_y = 0.0;
    spec.bg_vel_x = -1.0;
    spec.bg_vel_y = 0.0;
    spec.seed = seed;
    return spec;
}

/// Boundary pixels: mask pixels 4-adjacent to an in-frame non-mask pixel.
inline std::vector<std::pair<int, int>> boundary_pixels(const MaskArray& mask) {
    std::vector<std::pair<int, int>> out;
    const int h = static_cast<int>(mask.rows());
    const int w = static_cast<int>(mask.cols());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x)) continue;
            if ((y > 0 && !mask(y - 1, x)) || (y + 1 < h && !mask(y + 1, x)) ||
                (x > 0 && !mask(y, x - 1)) || (x + 1 < w && !mask(y, x + 1)))
                out.emplace_back(y, x);
        }
    return out;
}

/// Runs the coupled fixed-point iteration in chunks until its eigen-residual
/// against A drops below the target (or the budget runs out); the spectral
/// gap varies per instance, so a fixed iteration count is not reliable.
inline VectorX converge_coupled(const MatrixX& M, const MatrixX& F, Real alpha, Real beta,
                                const MatrixX& A, Real residual_target,
                                int max_iterations = 60000) {
    VectorX x = VectorX::Ones(M.rows());
    for (int done = 0; done < max_iterations; done += 250) {
        x = oracle::coupled_iteration(M, F, alpha, beta, x, 250);
        const Real lambda = x.dot(A * x);
        if ((A * x - lambda * x).norm() <= residual_target) break;
    }
    return x;
}

/// Exhaustive reference for the boundary F-measure: enumerates all pairwise
/// Chebyshev distances between the two boundary sets.
inline Real brute_force_boundary_f(const MaskArray& pred, const MaskArray& gt, int theta) {
    const auto pb = boundary_pixels(pred);
    const auto gb = boundary_pixels(gt);
    if (pb.empty() && gb.empty()) return 1.0;
    if (pb.empty() || gb.empty()) return 0.0;
    auto matched = [theta](const std::vector<std::pair<int, int>>& from,
                           const std::vector<std::pair<int, int>>& to) {
        long hits = 0;
        for (const auto& [y, x] : from) {
            bool found = false;
            for (const auto& [ty, tx] : to) {
                if (std::max(std::abs(y - ty), std::abs(x - tx)) <= theta) {
                    found = true;
                    break;
                }
            }
            hits += found ? 1 : 0;
        }
        return Real(hits) / Real(from.size());
    };
    const Real precision = matched(pb, gb);
    const Real recall = matched(gb, pb);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace flowseg::test
