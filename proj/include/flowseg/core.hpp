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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

namespace flowseg {

/// Scalar type used for all label/feature arithmetic; retarget here.
using Real = double;

using VectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using MatrixX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using ArrayXX = Eigen::Array<Real, Eigen::Dynamic, Eigen::Dynamic>;
using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Linear pixel index t*h*w + y*w + x over the whole clip.
using NodeIndex = std::int64_t;
inline constexpr NodeIndex kNoNode = -1;

/// Uniform reals in [0, 1) built directly from mt19937_64 words. The standard
/// library distributions are implementation-defined; this mapping is not, so
/// seeded outputs are reproducible across toolchains.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    Real next() { return Real(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    Real next(Real lo, Real hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

/// 1 - |cos(a, b)|; 0 when the directions agree up to sign. Evaluated as
/// min(||a' - b'||^2, ||a' + b'||^2) / 2 over the normalised vectors, which
/// is the same quantity but keeps full precision for tiny angles where the
/// dot-product form cancels away.
inline Real direction_change(const VectorX& a, const VectorX& b) {
    const Real na = a.norm();
    const Real nb = b.norm();
    if (na == 0 || nb == 0) return 1.0;
    const VectorX ua = a / na;
    const VectorX ub = b / nb;
    return std::min((ua - ub).squaredNorm(), (ua + ub).squaredNorm()) / 2.0;
}

/// Signed cosine between two directions.
inline Real cosine(const VectorX& a, const VectorX& b) {
    const Real na = a.norm();
    const Real nb = b.norm();
    if (na == 0 || nb == 0) return 0.0;
    return a.dot(b) / (na * nb);
}

}  // namespace flowseg
