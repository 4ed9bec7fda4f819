#pragma once

#include <deque>
#include <utility>
#include <vector>

#include "saltrack/fusion.hpp"
#include "saltrack/net.hpp"
#include "saltrack/tensor.hpp"

namespace saltrack {

inline constexpr int kSampleBufferCap = 20;

struct MaskParams {
    /// 0 keeps the adaptive rule (twice the mean, clamped); a positive value
    /// thresholds at that fraction of the map max instead. The tracker runs
    /// with 0.32: single-frame evidence holds a 1/(sum_j c^-j) share of the
    /// accumulated map, so the cut must sit near that share or newly entered
    /// ground can never join the mask, while much lower cuts admit enough of
    /// the saliency skirt to inflate the mask over time.
    double relative_threshold = 0.0;
    double clamp_lo = 0.1;  // adaptive-threshold clamp, fractions of the map max
    double clamp_hi = 0.9;
};

struct TrackerConfig {
    int tau = 2;
    double decay_c = 1.1;
    double crop_scale = 1.5;
    MaskParams mask{0.32, 0.1, 0.9};
    int n_scales = 6;
    int finetune_iterations = 30;
    int init_finetune_iterations = 120;  // first-frame adaptation runs longer
    double finetune_lr = 1e-4;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    uint64_t seed = 1;
    FusionConfig fusion;

    void validate() const {
        if (decay_c <= 1.0) throw ConfigError("decay factor c must be > 1");
        if (tau < 0) throw ConfigError("tau must be >= 0");
        if (crop_scale < 1.0) throw ConfigError("crop_scale must be >= 1");
    }
};

struct TrackerState {
    int t = 0;
    double center_x = 0.0, center_y = 0.0;
    double region_w = 0.0, region_h = 0.0;
    std::deque<SaliencyMap> stcsm_history;  // newest at the back, patch geometry
    std::deque<std::pair<ImageTensor, BinaryMask>> sample_buffer;  // net-size [0,1] pairs
    SaliencyNet net;
    TrackerConfig config;
    int lost_frames = 0;

    TrackerState() : net(64) {}
};

struct TrackOutput {
    BinaryMask mask;       // full frame
    Rect bbox;             // tightest box around the mask
    double center_x = 0.0, center_y = 0.0;
    bool lost = false;
    SaliencyMap saliency;  // full-frame STCSM, zero outside the search patch
};

struct PatchCrop {
    ImageTensor image;  // possibly downscaled so the longest edge fits max_edge
    Rect rect;          // source rect in frame coordinates
    double scale = 1.0; // patch pixels per frame pixel
};

PatchCrop crop_patch(const ImageTensor& frame, double cx, double cy,
                     double region_w, double region_h, double crop_scale,
                     int max_edge = kMaxCropEdge);

/// Threshold (adaptive or relative per MaskParams), keep the largest
/// 4-connected component, fill enclosed background holes. The image argument
/// is kept for interface parity with prior-guided refiners; this refiner is
/// saliency-only.
BinaryMask refine_mask(const SaliencyMap& saliency, const ImageTensor& image,
                       const MaskParams& params = {});

/// Decay-weighted accumulation:
/// (S_t + sum_j c^-j * hist[t-j]) / (1 + sum_j c^-j), looking back over at
/// most tau+1 entries. Pushes the result into the history ring (capacity
/// tau+1). History maps are resized to S_t's geometry.
SaliencyMap stcsm_update(const SaliencyMap& s_t, std::deque<SaliencyMap>& history,
                         int tau, double c);

/// {identity, mirror} x {0, 90, 180, 270} degrees; masks move with images.
std::vector<std::pair<ImageTensor, BinaryMask>> augment(const ImageTensor& image,
                                                        const BinaryMask& mask);
std::pair<ImageTensor, BinaryMask> augment_variant(const ImageTensor& image,
                                                   const BinaryMask& mask, int variant);

TrackOutput localize(const SaliencyMap& stcsm, const PatchCrop& crop,
                     int frame_w, int frame_h, const MaskParams& params);

/// Push the pair into the ring buffer and run decoder-side SGD over
/// augmented samples drawn round-robin from it. Divergence restores the
/// pre-update parameters and rethrows. iterations < 0 uses the configured
/// per-frame count.
void fine_tune(TrackerState& state, const ImageTensor& net_image01,
               const BinaryMask& net_mask, int iterations = -1);

TrackerState tracker_initialize(const ImageTensor& frame, double cx, double cy,
                                double region_w, double region_h, SaliencyNet net,
                                const TrackerConfig& cfg);

/// One step of the per-frame loop: crop, fuse, accumulate, localize,
/// fine-tune. A lost target keeps the previous center/region and skips the
/// fine-tune for the frame.
TrackOutput track_frame(TrackerState& state, const ImageTensor& frame);

}  // namespace saltrack
