#pragma once

#include <string>
#include <vector>

#include "saltrack/tensor.hpp"

namespace saltrack {

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct EvalRecord {
    std::string id;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    double iou_mask = 0.0;
    double iou_bbox = 0.0;
    double center_error_px = 0.0;
};

/// T_a = twice the mean saliency, reported raw.
double adaptive_threshold(const SaliencyMap& map);

/// Empty-set conventions: precision = 1 for an empty prediction,
/// recall = 1 for an empty ground truth.
std::pair<double, double> precision_recall(const BinaryMask& pred, const BinaryMask& gt);

/// F = (1+b2)*P*R / (b2*P + R); 0 when the denominator vanishes.
double f_measure(double precision, double recall, double beta2 = 0.3);

struct PRCurve {
    std::vector<PRPoint> points;  // 256 thresholds k/255
    double auc = 0.0;             // trapezoid over recall-sorted points
};

/// Binarization is inclusive: pixel predicted when value >= k/255.
PRCurve pr_curve(const SaliencyMap& map, const BinaryMask& gt);

/// |a n b| / |a u b|; 1 when both empty, 0 when exactly one is.
double iou_mask(const BinaryMask& a, const BinaryMask& b);
double iou_bbox(const Rect& a, const Rect& b);

/// Tightest box containing the mask's foreground; empty rect if none.
Rect tight_bbox(const BinaryMask& mask);

/// Fraction of frames with center error within radius (OTB-style, 20 px).
double center_precision(const std::vector<double>& errors, double radius = 20.0);

void write_csv(const std::string& path, const std::vector<EvalRecord>& records);
std::string csv_to_string(const std::vector<EvalRecord>& records);

}  // namespace saltrack
