#include "saltrack/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace saltrack {

namespace {

// Half-pixel-center mapping shared by both bilinear resizes.
inline void bilinear_coords(int dst, int src_len, double scale,
                            int& i0, int& i1, double& frac) {
    double s = (dst + 0.5) / scale - 0.5;
    if (s < 0) s = 0;
    if (s > src_len - 1) s = src_len - 1;
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, src_len - 1);
    frac = s - i0;
}

}  // namespace

ImageTensor resize_bilinear(const ImageTensor& src, int out_h, int out_w) {
    if (src.height == out_h && src.width == out_w) return src;
    ImageTensor dst(out_h, out_w, src.channels);
    double sy = static_cast<double>(out_h) / src.height;
    double sx = static_cast<double>(out_w) / src.width;
    for (int y = 0; y < out_h; ++y) {
        int y0, y1;
        double fy;
        bilinear_coords(y, src.height, sy, y0, y1, fy);
        for (int x = 0; x < out_w; ++x) {
            int x0, x1;
            double fx;
            bilinear_coords(x, src.width, sx, x0, x1, fx);
            for (int c = 0; c < src.channels; ++c) {
                double top = src.at(c, y0, x0) * (1 - fx) + src.at(c, y0, x1) * fx;
                double bot = src.at(c, y1, x0) * (1 - fx) + src.at(c, y1, x1) * fx;
                dst.at(c, y, x) = top * (1 - fy) + bot * fy;
            }
        }
    }
    return dst;
}

SaliencyMap resize_bilinear(const SaliencyMap& src, int out_h, int out_w) {
    if (src.height == out_h && src.width == out_w) return src;
    SaliencyMap dst(out_h, out_w, src.stage);
    double sy = static_cast<double>(out_h) / src.height;
    double sx = static_cast<double>(out_w) / src.width;
    for (int y = 0; y < out_h; ++y) {
        int y0, y1;
        double fy;
        bilinear_coords(y, src.height, sy, y0, y1, fy);
        for (int x = 0; x < out_w; ++x) {
            int x0, x1;
            double fx;
            bilinear_coords(x, src.width, sx, x0, x1, fx);
            double top = src.at(y0, x0) * (1 - fx) + src.at(y0, x1) * fx;
            double bot = src.at(y1, x0) * (1 - fx) + src.at(y1, x1) * fx;
            dst.at(y, x) = top * (1 - fy) + bot * fy;
        }
    }
    return dst;
}

BinaryMask resize_nearest(const BinaryMask& src, int out_h, int out_w) {
    if (src.height == out_h && src.width == out_w) return src;
    BinaryMask dst(out_h, out_w);
    double sy = static_cast<double>(out_h) / src.height;
    double sx = static_cast<double>(out_w) / src.width;
    for (int y = 0; y < out_h; ++y) {
        int syi = std::min(static_cast<int>((y + 0.5) / sy), src.height - 1);
        for (int x = 0; x < out_w; ++x) {
            int sxi = std::min(static_cast<int>((x + 0.5) / sx), src.width - 1);
            dst.at(y, x) = src.at(syi, sxi);
        }
    }
    return dst;
}

}  // namespace saltrack
