#include "saltrack/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "saltrack/metrics.hpp"
#include "saltrack/regions.hpp"

namespace saltrack {

namespace {

// 4-connected component labeling, keeping only the largest foreground
// component in `mask`.
void keep_largest_component(BinaryMask& mask) {
    int h = mask.height, w = mask.width;
    std::vector<int> label(static_cast<size_t>(h) * w, 0);
    int next = 0;
    std::vector<size_t> sizes{0};
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            if (!mask.data[i] || label[i]) continue;
            ++next;
            sizes.push_back(0);
            stack.push_back(static_cast<int>(i));
            label[i] = next;
            while (!stack.empty()) {
                int p = stack.back();
                stack.pop_back();
                ++sizes[next];
                int py = p / w, px = p % w;
                const int ny[4] = {py - 1, py + 1, py, py};
                const int nx[4] = {px, px, px - 1, px + 1};
                for (int k = 0; k < 4; ++k) {
                    if (ny[k] < 0 || ny[k] >= h || nx[k] < 0 || nx[k] >= w) continue;
                    size_t q = static_cast<size_t>(ny[k]) * w + nx[k];
                    if (mask.data[q] && !label[q]) {
                        label[q] = next;
                        stack.push_back(static_cast<int>(q));
                    }
                }
            }
        }
    }
    if (next <= 1) return;
    int best = 1;
    for (int l = 2; l <= next; ++l)
        if (sizes[l] > sizes[best]) best = l;
    for (size_t i = 0; i < mask.data.size(); ++i)
        mask.data[i] = (label[i] == best) ? 1 : 0;
}

// flood background from the border; unreached background is a hole
void fill_holes(BinaryMask& mask) {
    int h = mask.height, w = mask.width;
    std::vector<uint8_t> reached(static_cast<size_t>(h) * w, 0);
    std::vector<int> stack;
    auto try_seed = [&](int y, int x) {
        size_t i = static_cast<size_t>(y) * w + x;
        if (!mask.data[i] && !reached[i]) {
            reached[i] = 1;
            stack.push_back(static_cast<int>(i));
        }
    };
    for (int x = 0; x < w; ++x) {
        try_seed(0, x);
        try_seed(h - 1, x);
    }
    for (int y = 0; y < h; ++y) {
        try_seed(y, 0);
        try_seed(y, w - 1);
    }
    while (!stack.empty()) {
        int p = stack.back();
        stack.pop_back();
        int py = p / w, px = p % w;
        const int ny[4] = {py - 1, py + 1, py, py};
        const int nx[4] = {px, px, px - 1, px + 1};
        for (int k = 0; k < 4; ++k) {
            if (ny[k] < 0 || ny[k] >= h || nx[k] < 0 || nx[k] >= w) continue;
            size_t q = static_cast<size_t>(ny[k]) * w + nx[k];
            if (!mask.data[q] && !reached[q]) {
                reached[q] = 1;
                stack.push_back(static_cast<int>(q));
            }
        }
    }
    for (size_t i = 0; i < mask.data.size(); ++i)
        if (!mask.data[i] && !reached[i]) mask.data[i] = 1;
}

double mask_cut(const SaliencyMap& saliency, const MaskParams& params, double mx) {
    if (params.relative_threshold > 0.0) return params.relative_threshold * mx;
    return std::clamp(adaptive_threshold(saliency), params.clamp_lo * mx,
                      params.clamp_hi * mx);
}

}  // namespace

PatchCrop crop_patch(const ImageTensor& frame, double cx, double cy,
                     double region_w, double region_h, double crop_scale,
                     int max_edge) {
    // a handful of pixels is the least the region grid can be built on
    const int kMinPatch = 6;
    int w = std::max(kMinPatch, static_cast<int>(std::llround(region_w * crop_scale)));
    int h = std::max(kMinPatch, static_cast<int>(std::llround(region_h * crop_scale)));
    Rect rect{static_cast<int>(std::llround(cx - w / 2.0)),
              static_cast<int>(std::llround(cy - h / 2.0)), w, h};
    rect = rect.clipped(frame.width, frame.height);
    if (rect.empty()) throw UsageError("crop_patch: patch outside frame");

    PatchCrop out;
    out.rect = rect;
    out.image = ImageTensor(rect.h, rect.w, frame.channels);
    for (int c = 0; c < frame.channels; ++c)
        for (int y = 0; y < rect.h; ++y)
            for (int x = 0; x < rect.w; ++x)
                out.image.at(c, y, x) = frame.at(c, rect.y + y, rect.x + x);
    out.scale = 1.0;
    int longest = std::max(rect.w, rect.h);
    if (longest > max_edge) {
        out.scale = static_cast<double>(max_edge) / longest;
        int nw = std::max(1, static_cast<int>(std::llround(rect.w * out.scale)));
        int nh = std::max(1, static_cast<int>(std::llround(rect.h * out.scale)));
        out.image = resize_bilinear(out.image, nh, nw);
    }
    return out;
}

BinaryMask refine_mask(const SaliencyMap& saliency, const ImageTensor& image,
                       const MaskParams& params) {
    (void)image;  // refinement is saliency-only, see header
    double mx = 0.0;
    for (double v : saliency.data) mx = std::max(mx, v);
    if (mx <= 0.0) throw EmptyMaskError("refine_mask: all-zero saliency");

    double t = mask_cut(saliency, params, mx);
    BinaryMask mask(saliency.height, saliency.width);
    for (size_t i = 0; i < mask.data.size(); ++i)
        mask.data[i] = saliency.data[i] > t ? 1 : 0;
    keep_largest_component(mask);
    fill_holes(mask);
    return mask;
}

SaliencyMap stcsm_update(const SaliencyMap& s_t, std::deque<SaliencyMap>& history,
                         int tau, double c) {
    SaliencyMap out = s_t;
    out.stage = SaliencyStage::Normalized;
    double wsum = 1.0;
    int lookback = static_cast<int>(std::min<size_t>(history.size(), tau + 1));
    for (int j = 1; j <= lookback; ++j) {
        double weight = std::pow(c, -j);
        const SaliencyMap& prev = history[history.size() - j];
        SaliencyMap aligned = resize_bilinear(prev, s_t.height, s_t.width);
        for (size_t i = 0; i < out.data.size(); ++i)
            out.data[i] += weight * aligned.data[i];
        wsum += weight;
    }
    for (double& v : out.data) v /= wsum;
    history.push_back(out);
    while (history.size() > static_cast<size_t>(tau + 1)) history.pop_front();
    return out;
}

std::pair<ImageTensor, BinaryMask> augment_variant(const ImageTensor& image,
                                                   const BinaryMask& mask, int variant) {
    bool mirror = (variant & 4) != 0;
    int quarter_turns = variant & 3;

    ImageTensor img = image;
    BinaryMask msk = mask;
    if (mirror) {
        ImageTensor mi(img.height, img.width, img.channels);
        BinaryMask mm(msk.height, msk.width);
        for (int c = 0; c < img.channels; ++c)
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    mi.at(c, y, x) = img.at(c, y, img.width - 1 - x);
        for (int y = 0; y < msk.height; ++y)
            for (int x = 0; x < msk.width; ++x)
                mm.at(y, x) = msk.at(y, msk.width - 1 - x);
        img = std::move(mi);
        msk = std::move(mm);
    }
    for (int r = 0; r < quarter_turns; ++r) {
        // 90 degrees clockwise: out(y, x) = in(h-1-x, y)
        ImageTensor ri(img.width, img.height, img.channels);
        BinaryMask rm(msk.width, msk.height);
        for (int c = 0; c < img.channels; ++c)
            for (int y = 0; y < ri.height; ++y)
                for (int x = 0; x < ri.width; ++x)
                    ri.at(c, y, x) = img.at(c, img.height - 1 - x, y);
        for (int y = 0; y < rm.height; ++y)
            for (int x = 0; x < rm.width; ++x)
                rm.at(y, x) = msk.at(msk.height - 1 - x, y);
        img = std::move(ri);
        msk = std::move(rm);
    }
    return {std::move(img), std::move(msk)};
}

std::vector<std::pair<ImageTensor, BinaryMask>> augment(const ImageTensor& image,
                                                        const BinaryMask& mask) {
    std::vector<std::pair<ImageTensor, BinaryMask>> out;
    out.reserve(8);
    for (int v = 0; v < 8; ++v) out.push_back(augment_variant(image, mask, v));
    return out;
}

TrackOutput localize(const SaliencyMap& stcsm, const PatchCrop& crop,
                     int frame_w, int frame_h, const MaskParams& params) {
    BinaryMask patch_mask;
    try {
        patch_mask = refine_mask(stcsm, crop.image, params);
    } catch (const EmptyMaskError&) {
        throw TargetLostError("localize: empty mask");
    }
    if (patch_mask.count_foreground() == 0)
        throw TargetLostError("localize: empty mask");

    TrackOutput out;
    out.mask = BinaryMask(frame_h, frame_w);
    BinaryMask placed = resize_nearest(patch_mask, crop.rect.h, crop.rect.w);
    for (int y = 0; y < crop.rect.h; ++y)
        for (int x = 0; x < crop.rect.w; ++x)
            out.mask.at(crop.rect.y + y, crop.rect.x + x) = placed.at(y, x);

    out.bbox = tight_bbox(out.mask);
    out.center_x = out.bbox.x + out.bbox.w / 2.0;
    out.center_y = out.bbox.y + out.bbox.h / 2.0;

    out.saliency = SaliencyMap(frame_h, frame_w, SaliencyStage::Normalized, 0.0);
    SaliencyMap sal = resize_bilinear(stcsm, crop.rect.h, crop.rect.w);
    for (int y = 0; y < crop.rect.h; ++y)
        for (int x = 0; x < crop.rect.w; ++x)
            out.saliency.at(crop.rect.y + y, crop.rect.x + x) = sal.at(y, x);
    return out;
}

void fine_tune(TrackerState& state, const ImageTensor& net_image01,
               const BinaryMask& net_mask, int iterations) {
    state.sample_buffer.emplace_back(net_image01, net_mask);
    while (state.sample_buffer.size() > kSampleBufferCap) state.sample_buffer.pop_front();

    int iters = iterations < 0 ? state.config.finetune_iterations : iterations;
    if (iters <= 0) return;

    SaliencyNet snapshot = state.net;
    RandomSource rng(state.config.seed * 0x9e3779b97f4a7c15ull + state.t);
    try {
        for (int it = 0; it < iters; ++it) {
            const auto& [img, msk] = state.sample_buffer[it % state.sample_buffer.size()];
            int variant = static_cast<int>(rng.next_below(8));
            auto [aug_img, aug_msk] = augment_variant(img, msk, variant);
            for (double& v : aug_img.data) v -= 0.5;
            double loss = 0.0;
            NetGradients grads;
            try {
                grads = state.net.backward(aug_img, aug_msk, &loss, true);
            } catch (const NumericError& e) {
                throw TrainingError("fine_tune diverged at iteration " +
                                    std::to_string(it) + ": " + e.what());
            }
            if (!std::isfinite(loss))
                throw TrainingError("fine_tune diverged at iteration " + std::to_string(it));
            state.net.sgd_step(grads, state.config.finetune_lr, state.config.momentum,
                               state.config.weight_decay, true);
        }
    } catch (...) {
        state.net = snapshot;
        throw;
    }
}

namespace {

struct FrameAnalysis {
    PatchCrop crop;
    SaliencyMap saliency;  // fused per-frame map, patch geometry
};

FrameAnalysis analyze_frame(const ImageTensor& frame, double cx, double cy,
                            double rw, double rh, const SaliencyNet& net,
                            const TrackerConfig& cfg) {
    FrameAnalysis fa;
    fa.crop = crop_patch(frame, cx, cy, rw, rh, cfg.crop_scale, cfg.fusion.max_crop_edge);
    // the multi-region/multi-scale scheme divides the patch itself, so the
    // grid base is the patch size: scale 1 spans 3/4 of the patch and still
    // contains the target with a margin
    double px = std::clamp((cx - fa.crop.rect.x) * fa.crop.scale, 1.0,
                           std::max(1.0, fa.crop.image.width - 2.0));
    double py = std::clamp((cy - fa.crop.rect.y) * fa.crop.scale, 1.0,
                           std::max(1.0, fa.crop.image.height - 2.0));
    RegionGrid grid = make_region_grid(px, py, fa.crop.image.width,
                                       fa.crop.image.height, cfg.n_scales,
                                       fa.crop.image.width, fa.crop.image.height);
    fa.saliency = fuse_pipeline(fa.crop.image, grid, net, cfg.fusion);
    return fa;
}

std::pair<ImageTensor, BinaryMask> net_pair(const PatchCrop& crop,
                                            const BinaryMask& patch_mask, int net_size) {
    ImageTensor img = resize_bilinear(crop.image, net_size, net_size);
    BinaryMask msk = resize_nearest(patch_mask, net_size, net_size);
    return {std::move(img), std::move(msk)};
}

}  // namespace

TrackerState tracker_initialize(const ImageTensor& frame, double cx, double cy,
                                double region_w, double region_h, SaliencyNet net,
                                const TrackerConfig& cfg) {
    cfg.validate();
    if (region_w <= 0 || region_h <= 0)
        throw UsageError("tracker_initialize: region must be positive");

    TrackerState state;
    state.net = std::move(net);
    state.config = cfg;
    state.t = 1;
    state.center_x = cx;
    state.center_y = cy;
    state.region_w = region_w;
    state.region_h = region_h;

    FrameAnalysis fa = analyze_frame(frame, cx, cy, region_w, region_h, state.net, cfg);
    BinaryMask refined;
    try {
        refined = refine_mask(fa.saliency, fa.crop.image, cfg.mask);
    } catch (const EmptyMaskError&) {
        throw EmptyMaskError("tracker_initialize: empty refined mask on the first frame");
    }

    // first-frame training target: thresholded saliency intersected with the
    // refined mask
    double mx = 0.0;
    for (double v : fa.saliency.data) mx = std::max(mx, v);
    double t = mask_cut(fa.saliency, cfg.mask, mx);
    BinaryMask intersection(fa.saliency.height, fa.saliency.width);
    for (size_t i = 0; i < intersection.data.size(); ++i)
        intersection.data[i] = (fa.saliency.data[i] > t && refined.data[i]) ? 1 : 0;
    if (intersection.count_foreground() == 0)
        throw EmptyMaskError("tracker_initialize: empty first-frame intersection mask");

    auto [img, msk] = net_pair(fa.crop, intersection, cfg.fusion.net_input_size);
    if (msk.count_foreground() == 0)
        throw EmptyMaskError("tracker_initialize: first-frame mask vanished at net scale");
    fine_tune(state, img, msk, cfg.init_finetune_iterations);

    state.stcsm_history.clear();
    state.stcsm_history.push_back(fa.saliency);
    return state;
}

TrackOutput track_frame(TrackerState& state, const ImageTensor& frame) {
    if (state.t < 1) throw UsageError("track_frame: tracker not initialized");
    const TrackerConfig& cfg = state.config;
    state.t += 1;

    FrameAnalysis fa = analyze_frame(frame, state.center_x, state.center_y,
                                     state.region_w, state.region_h, state.net, cfg);

    // history maps are resized to the current crop geometry inside
    // stcsm_update, which re-anchors the accumulated shape on the tracker's
    // own center estimates
    SaliencyMap stcsm = stcsm_update(fa.saliency, state.stcsm_history, cfg.tau,
                                     cfg.decay_c);

    TrackOutput out;
    try {
        out = localize(stcsm, fa.crop, frame.width, frame.height, cfg.mask);
    } catch (const TargetLostError&) {
        // keep the previous center/region and skip the fine-tune this frame
        out.lost = true;
        out.mask = BinaryMask(frame.height, frame.width);
        int bw = std::max(1, static_cast<int>(std::llround(state.region_w)));
        int bh = std::max(1, static_cast<int>(std::llround(state.region_h)));
        out.bbox = Rect{static_cast<int>(std::llround(state.center_x - bw / 2.0)),
                        static_cast<int>(std::llround(state.center_y - bh / 2.0)), bw, bh}
                       .clipped(frame.width, frame.height);
        out.center_x = state.center_x;
        out.center_y = state.center_y;
        out.saliency = SaliencyMap(frame.height, frame.width, SaliencyStage::Normalized);
        state.lost_frames += 1;
        return out;
    }

    state.center_x = out.center_x;
    state.center_y = out.center_y;
    state.region_w = out.bbox.w;
    state.region_h = out.bbox.h;

    BinaryMask patch_mask = refine_mask(stcsm, fa.crop.image, cfg.mask);
    auto [img, msk] = net_pair(fa.crop, patch_mask, cfg.fusion.net_input_size);
    if (msk.count_foreground() > 0) fine_tune(state, img, msk);
    return out;
}

}  // namespace saltrack
