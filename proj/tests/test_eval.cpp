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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flowseg/eval.hpp"
#include "support.hpp"

#include <nlohmann/json.hpp>

using namespace flowseg;
using namespace flowseg::eval;

namespace {

MaskArray empty_mask(int h, int w) { return MaskArray::Constant(h, w, false); }

MaskArray rect(int h, int w, int y0, int x0, int y1, int x1) {
    MaskArray mask = empty_mask(h, w);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) mask(y, x) = true;
    return mask;
}

MaskArray random_mask(int h, int w, RandomSource& rng, Real density) {
    MaskArray mask(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mask(y, x) = rng.next() < density;
    return mask;
}

}  // namespace

TEST_CASE("iou basic values") {
    const MaskArray full = rect(4, 4, 0, 0, 3, 3);
    const MaskArray left = rect(4, 4, 0, 0, 3, 1);
    const MaskArray right = rect(4, 4, 0, 2, 3, 3);

    CHECK(iou(left, left) == 1.0);
    CHECK(iou(left, right) == 0.0);
    CHECK(iou(left, full) == doctest::Approx(0.5));
    CHECK(iou(empty_mask(4, 4), empty_mask(4, 4)) == 1.0);
    CHECK_THROWS_AS(iou(left, empty_mask(3, 3)), std::invalid_argument);

    // symmetric, and growing the intersection can only help
    CHECK(iou(left, full) == iou(full, left));
    const MaskArray bigger = rect(4, 4, 0, 0, 3, 2);
    CHECK(iou(bigger, full) >= iou(left, full));
}

TEST_CASE("j_mean averages per-frame values") {
    const MaskArray a = rect(4, 4, 0, 0, 3, 3);
    const MaskArray b = rect(4, 4, 0, 0, 3, 1);
    CHECK(j_mean({a, b}, {a, a}) == doctest::Approx(0.75));
    CHECK(j_mean({a, a}, {a, a}) == 1.0);
    CHECK(j_mean({b}, {a}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(j_mean({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(j_mean({a}, {a, b}), std::invalid_argument);
}

TEST_CASE("boundary F-measure on closed forms") {
    const MaskArray square = rect(8, 8, 2, 2, 5, 5);
    CHECK(boundary_f(square, square, 0) == 1.0);
    CHECK(boundary_f(square, square, 2) == 1.0);

    CHECK(boundary_f(empty_mask(8, 8), square, 1) == 0.0);
    CHECK(boundary_f(square, empty_mask(8, 8), 1) == 0.0);
    CHECK(boundary_f(empty_mask(8, 8), empty_mask(8, 8), 3) == 1.0);

    // unit squares one pixel apart: perfect at theta=1, zero overlap at theta=0
    const MaskArray dot_a = rect(8, 8, 3, 3, 3, 3);
    const MaskArray dot_b = rect(8, 8, 3, 4, 3, 4);
    CHECK(boundary_f(dot_a, dot_b, 1) == 1.0);
    CHECK(boundary_f(dot_a, dot_b, 0) ==
          doctest::Approx(test::brute_force_boundary_f(dot_a, dot_b, 0)));
    CHECK(boundary_f(dot_a, dot_b, 0) == 0.0);
}

TEST_CASE("boundary F-measure is symmetric and matches the brute force") {
    RandomSource rng(31);
    for (int trial = 0; trial < 12; ++trial) {
        const MaskArray pred = random_mask(16, 16, rng, 0.35);
        const MaskArray gt = random_mask(16, 16, rng, 0.35);
        for (int theta : {0, 1, 2}) {
            const Real fast = boundary_f(pred, gt, theta);
            CHECK(fast == doctest::Approx(test::brute_force_boundary_f(pred, gt, theta))
                              .epsilon(1e-12));
            CHECK(fast == doctest::Approx(boundary_f(gt, pred, theta)).epsilon(1e-12));
        }
    }
}

TEST_CASE("default boundary tolerance follows the diagonal rule") {
    CHECK(default_boundary_tolerance(480, 854) == 8);  // ceil(0.0075 * 979.7)
    CHECK(default_boundary_tolerance(32, 32) == 1);
}

TEST_CASE("mask_to_bbox finds the largest 4-connected component") {
    MaskArray single = empty_mask(5, 5);
    single(2, 3) = true;
    const auto box = mask_to_bbox(single);
    REQUIRE(box.has_value());
    CHECK(box->x_min == 3);
    CHECK(box->x_max == 3);
    CHECK(box->y_min == 2);
    CHECK(box->y_max == 2);

    CHECK_FALSE(mask_to_bbox(empty_mask(4, 4)).has_value());

    // 5-pixel component wins over the 3-pixel one
    MaskArray two = empty_mask(6, 8);
    for (int x = 0; x < 5; ++x) two(0, x) = true;
    for (int x = 5; x < 8; ++x) two(5, x) = true;
    const auto biggest = mask_to_bbox(two);
    REQUIRE(biggest.has_value());
    CHECK(biggest->y_min == 0);
    CHECK(biggest->y_max == 0);
    CHECK(biggest->x_min == 0);
    CHECK(biggest->x_max == 4);

    // diagonal pixels are not 4-connected
    MaskArray diag = empty_mask(4, 4);
    diag(0, 0) = diag(1, 1) = diag(2, 2) = true;
    const auto diag_box = mask_to_bbox(diag);
    REQUIRE(diag_box.has_value());
    CHECK(diag_box->x_min == diag_box->x_max);
}

TEST_CASE("corloc applies the 0.5 pascal criterion") {
    const io::Box big{0, 0, 9, 9};
    const io::Box half{0, 0, 9, 4};      // IoU exactly 0.5
    const io::Box quadrant{0, 0, 4, 4};  // IoU 0.25

    CHECK(box_iou(big, half) == doctest::Approx(0.5));
    CHECK(box_iou(big, quadrant) == doctest::Approx(0.25));

    using Boxes = std::vector<std::optional<io::Box>>;
    CHECK(corloc(Boxes{big, big}, Boxes{big, big}) == 1.0);
    CHECK(corloc(Boxes{quadrant}, Boxes{big}) == 0.0);
    CHECK(corloc(Boxes{half}, Boxes{big}) == 1.0);  // >= rule

    // frames without ground truth are skipped; missing predictions fail
    CHECK(corloc(Boxes{std::nullopt, big}, Boxes{std::nullopt, big}) == 1.0);
    CHECK(corloc(Boxes{std::nullopt}, Boxes{big}) == 0.0);

    // reordering both lists together changes nothing
    CHECK(corloc(Boxes{quadrant, big}, Boxes{big, big}) ==
          corloc(Boxes{big, quadrant}, Boxes{big, big}));
}

TEST_CASE("evaluate_masks fills the report and the json uses fixed names") {
    const MaskArray a = rect(8, 8, 1, 1, 4, 4);
    const MaskArray b = rect(8, 8, 1, 1, 4, 3);
    const MetricReport report = evaluate_masks({a, b}, {a, a}, 1);
    REQUIRE(report.j_mean.has_value());
    REQUIRE(report.f_mean.has_value());
    REQUIRE(report.corloc.has_value());
    CHECK(report.per_frame_j.size() == 2);
    CHECK(report.per_frame_j[0] == 1.0);
    CHECK(*report.corloc == 1.0);  // the shrunk box still overlaps >= 0.5

    const auto parsed = nlohmann::json::parse(report_json(report));
    CHECK(parsed.contains("j_mean"));
    CHECK(parsed.contains("f_mean"));
    CHECK(parsed.contains("corloc"));
    CHECK(parsed["per_frame_j"].size() == 2);
    CHECK(parsed["per_frame_f"].size() == 2);

    const std::string text = report_text(report);
    CHECK(text.find("j_mean=") != std::string::npos);
    CHECK(text.find("f_mean=") != std::string::npos);

    // box-only reports carry corloc alone
    MetricReport boxes_only;
    boxes_only.corloc = 0.5;
    const std::string box_text = report_text(boxes_only);
    CHECK(box_text.find("j_mean") == std::string::npos);
    CHECK(box_text.find("corloc=0.5") != std::string::npos);
}
