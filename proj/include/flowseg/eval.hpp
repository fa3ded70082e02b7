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

#include <optional>
#include <string>
#include <vector>

namespace flowseg::eval {

/// Region intersection-over-union; two empty masks score 1.
Real iou(const MaskArray& pred, const MaskArray& gt);

/// Mean per-frame IoU.
Real j_mean(const std::vector<MaskArray>& preds, const std::vector<MaskArray>& gts);

/// F-measure over boundary pixels. A boundary pixel is a mask pixel with a
/// 4-neighbour inside the frame that is not in the mask. A predicted boundary
/// pixel counts as matched when some ground-truth boundary pixel lies within
/// Chebyshev distance theta (and symmetrically for recall).
Real boundary_f(const MaskArray& pred, const MaskArray& gt, int theta);

/// DAVIS-style default: ceil(0.0075 * image diagonal).
int default_boundary_tolerance(int height, int width);

/// Tight box over the largest 4-connected component; nullopt when empty.
std::optional<io::Box> mask_to_bbox(const MaskArray& mask);

/// IoU of inclusive pixel boxes.
Real box_iou(const io::Box& a, const io::Box& b);

/// Fraction of frames with a ground-truth box where the predicted box
/// overlaps it with IoU >= 0.5; a missing prediction counts as a miss and
/// frames without a ground-truth box are skipped.
Real corloc(const std::vector<std::optional<io::Box>>& pred,
            const std::vector<std::optional<io::Box>>& gt);

struct MetricReport {
    std::optional<Real> j_mean;
    std::optional<Real> f_mean;
    std::optional<Real> corloc;
    std::vector<Real> per_frame_j;
    std::vector<Real> per_frame_f;
};

/// Full mask-vs-mask report: J, boundary F at the given tolerance, and
/// CorLoc over boxes extracted from the masks.
MetricReport evaluate_masks(const std::vector<MaskArray>& preds,
                            const std::vector<MaskArray>& gts, int theta);

/// Flat key=value block, one metric per line.
std::string report_text(const MetricReport& report);

/// JSON object with fields j_mean, f_mean, corloc, per_frame_j, per_frame_f.
std::string report_json(const MetricReport& report);

}  // namespace flowseg::eval
