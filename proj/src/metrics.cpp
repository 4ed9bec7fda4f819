#include "saltrack/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace saltrack {

double adaptive_threshold(const SaliencyMap& map) {
    double sum = std::accumulate(map.data.begin(), map.data.end(), 0.0);
    return 2.0 * sum / static_cast<double>(map.data.size());
}

std::pair<double, double> precision_recall(const BinaryMask& pred, const BinaryMask& gt) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw UsageError("precision_recall: size mismatch");
    size_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        if (pred.data[i] && gt.data[i]) ++tp;
        else if (pred.data[i]) ++fp;
        else if (gt.data[i]) ++fn;
    }
    double precision = (tp + fp == 0) ? 1.0 : static_cast<double>(tp) / (tp + fp);
    double recall = (tp + fn == 0) ? 1.0 : static_cast<double>(tp) / (tp + fn);
    return {precision, recall};
}

double f_measure(double precision, double recall, double beta2) {
    double denom = beta2 * precision + recall;
    if (denom <= 0.0) return 0.0;
    return (1.0 + beta2) * precision * recall / denom;
}

PRCurve pr_curve(const SaliencyMap& map, const BinaryMask& gt) {
    if (map.height != gt.height || map.width != gt.width)
        throw UsageError("pr_curve: size mismatch");
    PRCurve curve;
    curve.points.reserve(256);
    size_t gt_fg = gt.count_foreground();
    for (int k = 0; k < 256; ++k) {
        double thr = static_cast<double>(k) / 255.0;
        size_t tp = 0, predicted = 0;
        for (size_t i = 0; i < map.data.size(); ++i) {
            if (map.data[i] >= thr) {
                ++predicted;
                if (gt.data[i]) ++tp;
            }
        }
        PRPoint p;
        p.threshold = thr;
        p.precision = predicted == 0 ? 1.0 : static_cast<double>(tp) / predicted;
        p.recall = gt_fg == 0 ? 1.0 : static_cast<double>(tp) / gt_fg;
        curve.points.push_back(p);
    }
    std::vector<PRPoint> sorted = curve.points;
    std::sort(sorted.begin(), sorted.end(),
              [](const PRPoint& a, const PRPoint& b) { return a.recall < b.recall; });
    double auc = 0.0;
    for (size_t i = 1; i < sorted.size(); ++i)
        auc += (sorted[i].recall - sorted[i - 1].recall) *
               0.5 * (sorted[i].precision + sorted[i - 1].precision);
    curve.auc = auc;
    return curve;
}

double iou_mask(const BinaryMask& a, const BinaryMask& b) {
    if (a.height != b.height || a.width != b.width)
        throw UsageError("iou_mask: size mismatch");
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        if (a.data[i] && b.data[i]) ++inter;
        if (a.data[i] || b.data[i]) ++uni;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou_bbox(const Rect& a, const Rect& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    int ix = std::max(a.x, b.x);
    int iy = std::max(a.y, b.y);
    int ix2 = std::min(a.x2(), b.x2());
    int iy2 = std::min(a.y2(), b.y2());
    int iw = std::max(ix2 - ix, 0);
    int ih = std::max(iy2 - iy, 0);
    double inter = static_cast<double>(iw) * ih;
    double uni = static_cast<double>(a.area()) + b.area() - inter;
    return uni <= 0 ? 0.0 : inter / uni;
}

Rect tight_bbox(const BinaryMask& mask) {
    int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(y, x)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
        }
    }
    if (x1 < 0) return Rect{0, 0, 0, 0};
    return Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

double center_precision(const std::vector<double>& errors, double radius) {
    if (errors.empty()) throw UsageError("center_precision: empty error list");
    size_t hits = 0;
    for (double e : errors)
        if (e <= radius) ++hits;
    return static_cast<double>(hits) / errors.size();
}

std::string csv_to_string(const std::vector<EvalRecord>& records) {
    std::string out = "id,precision,recall,f_measure,iou_mask,iou_bbox,center_error_px\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                      r.precision, r.recall, r.f_measure, r.iou_mask, r.iou_bbox,
                      r.center_error_px);
        out += r.id;
        out += buf;
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<EvalRecord>& records) {
    std::ofstream f(path, std::ios::binary);  // LF endings on every platform
    if (!f) throw IoError("cannot open CSV for writing: " + path);
    f << csv_to_string(records);
    if (!f) throw IoError("CSV write failed: " + path);
}

}  // namespace saltrack
