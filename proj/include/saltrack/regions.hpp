#pragma once

#include <array>
#include <string>
#include <vector>

#include "saltrack/tensor.hpp"

namespace saltrack {

enum class PartId { Whole, QuadTL, QuadTR, QuadBL, QuadBR, Inside, Outside };

const char* part_name(PartId id);

/// One (part, scale) crop from the multi-region/multi-scale grid.
/// For Outside parts, mask_interior is set and `interior` holds the
/// suppressed central rect (the scale's Inside rect, clipped).
struct RegionSpec {
    PartId part = PartId::Whole;
    int scale_index = 1;  // 1..N
    Rect rect;
    bool mask_interior = false;
    Rect interior;
};

struct RegionGrid {
    std::vector<RegionSpec> specs;  // 7 per scale
    int canvas_w = 0, canvas_h = 0;
    double center_x = 0, center_y = 0;
    int base_w = 0, base_h = 0;
    int n_scales = 0;
};

/// Scale n spans (n*3/4*w0, n*3/4*h0) centered on `center`; each scale
/// contributes whole, four quadrants, inside (half-size centered) and
/// outside (whole with the inside interior suppressed). Rects are clipped
/// to the canvas.
RegionGrid make_region_grid(double center_x, double center_y, int base_w, int base_h,
                            int n_scales, int canvas_w, int canvas_h);

/// Longest crop edge allowed before aspect-preserving downscale.
inline constexpr int kMaxCropEdge = 256;

ImageTensor crop_region(const ImageTensor& image, const RegionSpec& spec,
                        int max_edge = kMaxCropEdge);

/// Place `map` (resized back to spec.rect) onto a zeroed canvas; interior
/// of Outside parts is zeroed as well.
SaliencyMap pad_back(const SaliencyMap& map, const RegionSpec& spec,
                     int canvas_w, int canvas_h);

}  // namespace saltrack
