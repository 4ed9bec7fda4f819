#pragma once

#include <string>
#include <vector>

#include "saltrack/fusion.hpp"
#include "saltrack/tracker.hpp"

namespace saltrack {

/// Every tunable of the pipeline with its documented default. Parsed from
/// flat `key = value` files; unknown keys and out-of-range values are
/// rejected with line numbers.
struct RunConfig {
    int net_input_size = 64;
    int n_scales = 6;
    int tau = 2;
    double decay_c = 1.1;
    double crop_scale = 1.5;
    int max_crop_edge = 256;
    double sigma_s = 10.0;
    double sigma_r = 0.1;
    int dt_iterations = 3;
    double mask_threshold = 0.32;  // fraction of map max; 0 = adaptive rule
    double mask_clamp_lo = 0.1;
    double mask_clamp_hi = 0.9;
    int train_iterations = 500;
    double train_lr = 1e-4;
    int finetune_iterations = 30;
    int init_finetune_iterations = 120;
    double finetune_lr = 1e-4;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    uint64_t seed = 1;

    FusionConfig fusion_config() const;
    TrackerConfig tracker_config() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// One frame path per line, optional tab-separated mask path; the first
/// non-comment line is `init: x y w h`. Paths are relative to the manifest.
struct SequenceManifest {
    std::vector<std::string> frames;
    std::vector<std::string> gt_masks;  // empty or parallel to frames
    int init_x = 0, init_y = 0, init_w = 0, init_h = 0;
};

SequenceManifest parse_manifest(const std::string& path);

}  // namespace saltrack
