#include "saltrack/regions.hpp"

#include <algorithm>
#include <cmath>

namespace saltrack {

const char* part_name(PartId id) {
    switch (id) {
        case PartId::Whole: return "whole";
        case PartId::QuadTL: return "quad_tl";
        case PartId::QuadTR: return "quad_tr";
        case PartId::QuadBL: return "quad_bl";
        case PartId::QuadBR: return "quad_br";
        case PartId::Inside: return "inside";
        case PartId::Outside: return "outside";
    }
    return "?";
}

RegionGrid make_region_grid(double center_x, double center_y, int base_w, int base_h,
                            int n_scales, int canvas_w, int canvas_h) {
    if (base_w <= 0 || base_h <= 0)
        throw UsageError("make_region_grid: base size must be positive");
    if (n_scales < 1)
        throw UsageError("make_region_grid: need at least one scale");
    if (center_x < 0 || center_x >= canvas_w || center_y < 0 || center_y >= canvas_h)
        throw UsageError("make_region_grid: center outside canvas");

    RegionGrid grid;
    grid.canvas_w = canvas_w;
    grid.canvas_h = canvas_h;
    grid.center_x = center_x;
    grid.center_y = center_y;
    grid.base_w = base_w;
    grid.base_h = base_h;
    grid.n_scales = n_scales;
    grid.specs.reserve(static_cast<size_t>(7) * n_scales);

    auto push = [&](PartId part, int n, Rect r, bool mask_interior, Rect interior) {
        RegionSpec spec;
        spec.part = part;
        spec.scale_index = n;
        spec.rect = r.clipped(canvas_w, canvas_h);
        spec.mask_interior = mask_interior;
        spec.interior = interior.clipped(canvas_w, canvas_h);
        if (spec.rect.empty())
            throw DegenerateRegionError(std::string("degenerate region: part ") +
                                        part_name(part) + " scale " + std::to_string(n));
        grid.specs.push_back(spec);
    };

    for (int n = 1; n <= n_scales; ++n) {
        int w = std::max(1, static_cast<int>(std::llround(n * 0.75 * base_w)));
        int h = std::max(1, static_cast<int>(std::llround(n * 0.75 * base_h)));
        int x0 = static_cast<int>(std::llround(center_x - w / 2.0));
        int y0 = static_cast<int>(std::llround(center_y - h / 2.0));
        Rect whole{x0, y0, w, h};

        int xm = x0 + w / 2;
        int ym = y0 + h / 2;
        Rect tl{x0, y0, w / 2, h / 2};
        Rect tr{xm, y0, w - w / 2, h / 2};
        Rect bl{x0, ym, w / 2, h - h / 2};
        Rect br{xm, ym, w - w / 2, h - h / 2};

        int wi = std::max(1, w / 2);
        int hi = std::max(1, h / 2);
        Rect inside{x0 + (w - wi) / 2, y0 + (h - hi) / 2, wi, hi};

        push(PartId::Whole, n, whole, false, {});
        push(PartId::QuadTL, n, tl, false, {});
        push(PartId::QuadTR, n, tr, false, {});
        push(PartId::QuadBL, n, bl, false, {});
        push(PartId::QuadBR, n, br, false, {});
        push(PartId::Inside, n, inside, false, {});
        push(PartId::Outside, n, whole, true, inside);
    }
    return grid;
}

ImageTensor crop_region(const ImageTensor& image, const RegionSpec& spec, int max_edge) {
    Rect r = spec.rect;
    if (r.empty() || r.x < 0 || r.y < 0 || r.x2() > image.width || r.y2() > image.height)
        throw UsageError("crop_region: spec rect outside image");

    ImageTensor crop(r.h, r.w, image.channels);
    for (int c = 0; c < image.channels; ++c)
        for (int y = 0; y < r.h; ++y)
            for (int x = 0; x < r.w; ++x)
                crop.at(c, y, x) = image.at(c, r.y + y, r.x + x);

    if (spec.mask_interior && !spec.interior.empty()) {
        // interior pixels replaced by the crop's per-channel mean
        for (int c = 0; c < image.channels; ++c) {
            double mean = 0.0;
            for (int y = 0; y < r.h; ++y)
                for (int x = 0; x < r.w; ++x) mean += crop.at(c, y, x);
            mean /= static_cast<double>(r.w) * r.h;
            int ix0 = std::max(spec.interior.x - r.x, 0);
            int iy0 = std::max(spec.interior.y - r.y, 0);
            int ix1 = std::min(spec.interior.x2() - r.x, r.w);
            int iy1 = std::min(spec.interior.y2() - r.y, r.h);
            for (int y = iy0; y < iy1; ++y)
                for (int x = ix0; x < ix1; ++x) crop.at(c, y, x) = mean;
        }
    }

    int longest = std::max(crop.width, crop.height);
    if (longest > max_edge) {
        double f = static_cast<double>(max_edge) / longest;
        int nw = std::max(1, static_cast<int>(std::llround(crop.width * f)));
        int nh = std::max(1, static_cast<int>(std::llround(crop.height * f)));
        if (crop.width >= crop.height) nw = max_edge; else nh = max_edge;
        crop = resize_bilinear(crop, nh, nw);
    }
    return crop;
}

SaliencyMap pad_back(const SaliencyMap& map, const RegionSpec& spec,
                     int canvas_w, int canvas_h) {
    SaliencyMap out(canvas_h, canvas_w, map.stage, 0.0);
    const Rect& r = spec.rect;
    SaliencyMap patch = resize_bilinear(map, r.h, r.w);
    for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x)
            out.at(r.y + y, r.x + x) = patch.at(y, x);
    if (spec.mask_interior && !spec.interior.empty()) {
        const Rect& i = spec.interior;
        for (int y = i.y; y < i.y2(); ++y)
            for (int x = i.x; x < i.x2(); ++x) out.at(y, x) = 0.0;
    }
    return out;
}

}  // namespace saltrack
