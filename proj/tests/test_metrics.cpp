#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "saltrack/metrics.hpp"
#include "testutil.hpp"

using namespace saltrack;
using namespace saltrack::testutil;

TEST_CASE("adaptive_threshold: uniform, checker, zero") {
    SaliencyMap uniform(4, 4, SaliencyStage::Normalized, 0.3);
    CHECK(adaptive_threshold(uniform) == doctest::Approx(0.6));

    SaliencyMap checker(4, 4, SaliencyStage::Normalized);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) checker.at(y, x) = (x + y) % 2 ? 1.0 : 0.0;
    CHECK(adaptive_threshold(checker) == doctest::Approx(1.0));

    SaliencyMap zero(4, 4, SaliencyStage::Normalized, 0.0);
    CHECK(adaptive_threshold(zero) == 0.0);
}

TEST_CASE("precision_recall: identity, disjoint, half precision") {
    BinaryMask gt(4, 4);
    for (int i = 0; i < 4; ++i) gt.data[i] = 1;
    auto [p1, r1] = precision_recall(gt, gt);
    CHECK(p1 == 1.0);
    CHECK(r1 == 1.0);

    BinaryMask other(4, 4);
    for (int i = 4; i < 8; ++i) other.data[i] = 1;
    auto [p2, r2] = precision_recall(other, gt);
    CHECK(p2 == 0.0);
    CHECK(r2 == 0.0);

    BinaryMask cover(4, 4);
    for (int i = 0; i < 8; ++i) cover.data[i] = 1;  // gt plus equal-size extra
    auto [p3, r3] = precision_recall(cover, gt);
    CHECK(p3 == doctest::Approx(0.5));
    CHECK(r3 == 1.0);
}

TEST_CASE("precision_recall: empty conventions") {
    BinaryMask empty(3, 3);
    BinaryMask some(3, 3);
    some.data[0] = 1;
    auto [p, r] = precision_recall(empty, some);
    CHECK(p == 1.0);  // empty prediction
    CHECK(r == 0.0);
    auto [p2, r2] = precision_recall(some, empty);
    CHECK(p2 == 0.0);
    CHECK(r2 == 1.0);  // empty ground truth
}

TEST_CASE("f_measure: endpoints and the beta2=0.3 worked value") {
    CHECK(f_measure(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(f_measure(0.7, 0.0) == 0.0);
    CHECK(f_measure(0.8, 0.5) == doctest::Approx(1.3 * 0.4 / 0.74));
    CHECK(f_measure(0.8, 0.5) == doctest::Approx(0.70270).epsilon(1e-4));
}

TEST_CASE("f_measure: bounded by min and max of P and R") {
    RandomSource rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        double p = 0.01 + 0.99 * rng.next_double();
        double r = 0.01 + 0.99 * rng.next_double();
        double f = f_measure(p, r);
        CHECK(f >= std::min(p, r) - 1e-12);
        CHECK(f <= std::max(p, r) + 1e-12);
    }
}

TEST_CASE("pr_curve: 0/1 map against its own mask") {
    BinaryMask gt(4, 4);
    for (int i = 5; i < 11; ++i) gt.data[i] = 1;
    SaliencyMap map(4, 4, SaliencyStage::Normalized);
    for (size_t i = 0; i < gt.data.size(); ++i) map.data[i] = gt.data[i];

    PRCurve curve = pr_curve(map, gt);
    REQUIRE(curve.points.size() == 256);
    // threshold 0 predicts everything
    CHECK(curve.points[0].recall == 1.0);
    CHECK(curve.points[0].precision == doctest::Approx(6.0 / 16.0));
    // every positive threshold keeps the prediction equal to gt
    for (int k = 1; k < 256; ++k) {
        CHECK(curve.points[k].precision == 1.0);
        CHECK(curve.points[k].recall == 1.0);
    }
}

TEST_CASE("pr_curve: recall non-increasing and brute-force agreement") {
    RandomSource rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        SaliencyMap map = random_map(8, 8, rng);
        BinaryMask gt = random_mask(8, 8, rng);
        PRCurve curve = pr_curve(map, gt);

        for (int k = 1; k < 256; ++k)
            CHECK(curve.points[k].recall <= curve.points[k - 1].recall + 1e-12);

        // naive per-threshold recount
        size_t gt_fg = gt.count_foreground();
        for (int k = 0; k < 256; ++k) {
            double thr = k / 255.0;
            size_t tp = 0, pred = 0;
            for (size_t i = 0; i < map.data.size(); ++i) {
                bool hit = map.data[i] >= thr;
                if (hit) {
                    ++pred;
                    if (gt.data[i]) ++tp;
                }
            }
            double precision = pred == 0 ? 1.0 : double(tp) / pred;
            double recall = gt_fg == 0 ? 1.0 : double(tp) / gt_fg;
            CHECK(curve.points[k].precision == doctest::Approx(precision));
            CHECK(curve.points[k].recall == doctest::Approx(recall));
        }
        CHECK(curve.auc >= 0.0);
        CHECK(curve.auc <= 1.0 + 1e-12);
    }
}

TEST_CASE("iou: identity, disjoint, worked box value, symmetry") {
    BinaryMask a(4, 4);
    for (int i = 0; i < 6; ++i) a.data[i] = 1;
    CHECK(iou_mask(a, a) == 1.0);

    BinaryMask b(4, 4);
    for (int i = 10; i < 14; ++i) b.data[i] = 1;
    CHECK(iou_mask(a, b) == 0.0);
    CHECK(iou_mask(a, b) == iou_mask(b, a));

    CHECK(iou_bbox(Rect{0, 0, 2, 2}, Rect{1, 0, 2, 2}) == doctest::Approx(2.0 / 6.0));
    CHECK(iou_bbox(Rect{0, 0, 2, 2}, Rect{5, 5, 2, 2}) == 0.0);
    CHECK(iou_bbox(Rect{1, 2, 3, 4}, Rect{1, 2, 3, 4}) == 1.0);

    BinaryMask e1(4, 4), e2(4, 4);
    CHECK(iou_mask(e1, e2) == 1.0);  // both empty
    CHECK(iou_mask(e1, a) == 0.0);   // one empty
    CHECK(iou_bbox(Rect{}, Rect{}) == 1.0);
    CHECK(iou_bbox(Rect{}, Rect{0, 0, 2, 2}) == 0.0);
}

TEST_CASE("tight_bbox: exact bounds and empty mask") {
    BinaryMask m(8, 8);
    m.at(2, 3) = 1;
    m.at(5, 6) = 1;
    Rect b = tight_bbox(m);
    CHECK(b == Rect{3, 2, 4, 4});
    CHECK(tight_bbox(BinaryMask(4, 4)).empty());
}

TEST_CASE("center_precision: all-in, half, zero radius, empty list") {
    CHECK(center_precision({0, 0, 0}) == 1.0);
    CHECK(center_precision({10, 30}) == doctest::Approx(0.5));
    CHECK(center_precision({1, 2, 3}, 0.0) == 0.0);
    CHECK_THROWS_AS(center_precision({}), UsageError);
}

TEST_CASE("csv: exact header and 6-decimal fixed-point fields") {
    std::vector<EvalRecord> recs(1);
    recs[0].id = "frame_0001";
    recs[0].precision = 1.0;
    recs[0].recall = 0.5;
    recs[0].f_measure = 0.702703;
    recs[0].iou_mask = 1.0;
    recs[0].iou_bbox = 1.0 / 3.0;
    recs[0].center_error_px = 2.5;
    std::string csv = csv_to_string(recs);
    CHECK(csv ==
          "id,precision,recall,f_measure,iou_mask,iou_bbox,center_error_px\n"
          "frame_0001,1.000000,0.500000,0.702703,1.000000,0.333333,2.500000\n");
}
