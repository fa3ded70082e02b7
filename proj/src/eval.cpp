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

#include "flowseg/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace flowseg::eval {
namespace {

void require_same_shape(const MaskArray& a, const MaskArray& b, const char* where) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(where) + ": mask dimensions differ");
}

// Mask pixels 4-adjacent to an in-frame pixel outside the mask.
MaskArray boundary_of(const MaskArray& mask) {
    const int h = static_cast<int>(mask.rows());
    const int w = static_cast<int>(mask.cols());
    MaskArray boundary = MaskArray::Constant(h, w, false);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x)) continue;
            const bool edge = (y > 0 && !mask(y - 1, x)) || (y + 1 < h && !mask(y + 1, x)) ||
                              (x > 0 && !mask(y, x - 1)) || (x + 1 < w && !mask(y, x + 1));
            boundary(y, x) = edge;
        }
    return boundary;
}

// Chebyshev dilation by theta: true wherever a square window contains a set
// pixel. Separable into a horizontal then a vertical pass.
MaskArray dilate_chebyshev(const MaskArray& mask, int theta) {
    if (theta == 0) return mask;
    const int h = static_cast<int>(mask.rows());
    const int w = static_cast<int>(mask.cols());
    MaskArray horizontal = MaskArray::Constant(h, w, false);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask(y, x)) continue;
            for (int dx = std::max(0, x - theta); dx <= std::min(w - 1, x + theta); ++dx)
                horizontal(y, dx) = true;
        }
    MaskArray out = MaskArray::Constant(h, w, false);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!horizontal(y, x)) continue;
            for (int dy = std::max(0, y - theta); dy <= std::min(h - 1, y + theta); ++dy)
                out(dy, x) = true;
        }
    return out;
}

Real matched_fraction(const MaskArray& boundary, const MaskArray& target_dilated) {
    long total = 0;
    long matched = 0;
    for (Eigen::Index y = 0; y < boundary.rows(); ++y)
        for (Eigen::Index x = 0; x < boundary.cols(); ++x) {
            if (!boundary(y, x)) continue;
            ++total;
            if (target_dilated(y, x)) ++matched;
        }
    return total == 0 ? 0.0 : Real(matched) / Real(total);
}

}  // namespace

Real iou(const MaskArray& pred, const MaskArray& gt) {
    require_same_shape(pred, gt, "iou");
    long inter = 0;
    long uni = 0;
    for (Eigen::Index y = 0; y < pred.rows(); ++y)
        for (Eigen::Index x = 0; x < pred.cols(); ++x) {
            const bool p = pred(y, x);
            const bool g = gt(y, x);
            inter += (p && g) ? 1 : 0;
            uni += (p || g) ? 1 : 0;
        }
    return uni == 0 ? 1.0 : Real(inter) / Real(uni);
}

Real j_mean(const std::vector<MaskArray>& preds, const std::vector<MaskArray>& gts) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("j_mean: frame counts differ");
    if (preds.empty()) throw std::invalid_argument("j_mean: empty sequence");
    Real sum = 0.0;
    for (std::size_t t = 0; t < preds.size(); ++t) sum += iou(preds[t], gts[t]);
    return sum / Real(preds.size());
}

Real boundary_f(const MaskArray& pred, const MaskArray& gt, int theta) {
    require_same_shape(pred, gt, "boundary_f");
    if (theta < 0) throw std::invalid_argument("boundary_f: theta must be >= 0");
    const MaskArray pred_boundary = boundary_of(pred);
    const MaskArray gt_boundary = boundary_of(gt);
    const bool pred_empty = !pred_boundary.any();
    const bool gt_empty = !gt_boundary.any();
    if (pred_empty && gt_empty) return 1.0;
    if (pred_empty || gt_empty) return 0.0;
    const Real precision = matched_fraction(pred_boundary, dilate_chebyshev(gt_boundary, theta));
    const Real recall = matched_fraction(gt_boundary, dilate_chebyshev(pred_boundary, theta));
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

int default_boundary_tolerance(int height, int width) {
    const double diagonal = std::sqrt(double(height) * height + double(width) * width);
    return static_cast<int>(std::ceil(0.0075 * diagonal));
}

std::optional<io::Box> mask_to_bbox(const MaskArray& mask) {
    const int h = static_cast<int>(mask.rows());
    const int w = static_cast<int>(mask.cols());
    std::vector<int> label(std::size_t(h) * w, -1);
    int best_size = 0;
    std::optional<io::Box> best;
    std::vector<int> stack;
    int next_label = 0;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            if (!mask(sy, sx) || label[std::size_t(sy) * w + sx] >= 0) continue;
            io::Box box{sx, sy, sx, sy};
            int size = 0;
            stack.push_back(sy * w + sx);
            label[std::size_t(sy) * w + sx] = next_label;
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                const int y = p / w;
                const int x = p % w;
                ++size;
                box.x_min = std::min(box.x_min, x);
                box.x_max = std::max(box.x_max, x);
                box.y_min = std::min(box.y_min, y);
                box.y_max = std::max(box.y_max, y);
                const int neighbours[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
                for (const auto& nb : neighbours) {
                    const int ny = nb[0];
                    const int nx = nb[1];
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    if (!mask(ny, nx) || label[std::size_t(ny) * w + nx] >= 0) continue;
                    label[std::size_t(ny) * w + nx] = next_label;
                    stack.push_back(ny * w + nx);
                }
            }
            if (size > best_size) {
                best_size = size;
                best = box;
            }
            ++next_label;
        }
    }
    return best;
}

Real box_iou(const io::Box& a, const io::Box& b) {
    const long iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
    const long ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
    const long inter = std::max(0L, iw) * std::max(0L, ih);
    const long area_a = long(a.x_max - a.x_min + 1) * (a.y_max - a.y_min + 1);
    const long area_b = long(b.x_max - b.x_min + 1) * (b.y_max - b.y_min + 1);
    const long uni = area_a + area_b - inter;
    return uni == 0 ? 0.0 : Real(inter) / Real(uni);
}

Real corloc(const std::vector<std::optional<io::Box>>& pred,
            const std::vector<std::optional<io::Box>>& gt) {
    if (pred.size() != gt.size()) throw std::invalid_argument("corloc: frame counts differ");
    long evaluated = 0;
    long correct = 0;
    for (std::size_t t = 0; t < gt.size(); ++t) {
        if (!gt[t].has_value()) continue;
        ++evaluated;
        if (pred[t].has_value() && box_iou(*pred[t], *gt[t]) >= 0.5) ++correct;
    }
    return evaluated == 0 ? 1.0 : Real(correct) / Real(evaluated);
}

MetricReport evaluate_masks(const std::vector<MaskArray>& preds,
                            const std::vector<MaskArray>& gts, int theta) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("evaluate_masks: frame counts differ");
    if (preds.empty()) throw std::invalid_argument("evaluate_masks: empty sequence");
    MetricReport report;
    std::vector<std::optional<io::Box>> pred_boxes;
    std::vector<std::optional<io::Box>> gt_boxes;
    Real j_sum = 0.0;
    Real f_sum = 0.0;
    for (std::size_t t = 0; t < preds.size(); ++t) {
        const Real j = iou(preds[t], gts[t]);
        const Real f = boundary_f(preds[t], gts[t], theta);
        report.per_frame_j.push_back(j);
        report.per_frame_f.push_back(f);
        j_sum += j;
        f_sum += f;
        pred_boxes.push_back(mask_to_bbox(preds[t]));
        gt_boxes.push_back(mask_to_bbox(gts[t]));
    }
    report.j_mean = j_sum / Real(preds.size());
    report.f_mean = f_sum / Real(preds.size());
    report.corloc = corloc(pred_boxes, gt_boxes);
    return report;
}

std::string report_text(const MetricReport& report) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    if (report.j_mean) out << "j_mean=" << *report.j_mean << "\n";
    if (report.f_mean) out << "f_mean=" << *report.f_mean << "\n";
    if (report.corloc) out << "corloc=" << *report.corloc << "\n";
    return out.str();
}

std::string report_json(const MetricReport& report) {
    nlohmann::json j;
    if (report.j_mean) j["j_mean"] = *report.j_mean;
    if (report.f_mean) j["f_mean"] = *report.f_mean;
    if (report.corloc) j["corloc"] = *report.corloc;
    j["per_frame_j"] = report.per_frame_j;
    j["per_frame_f"] = report.per_frame_f;
    return j.dump(2) + "\n";
}

}  // namespace flowseg::eval
