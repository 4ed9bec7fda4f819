#pragma once

#include <vector>

#include "saltrack/net.hpp"
#include "saltrack/regions.hpp"
#include "saltrack/tensor.hpp"

namespace saltrack {

/// Simplex weights over the N scales: w_n >= 0, sum w = 1.
struct FusionWeights {
    std::vector<double> w;
};

/// Saliency value clamp applied before ln inside the weighted entropy.
inline constexpr double kEntropyClamp = 1e-6;

/// pad_back(exaction - inhibition): signed saliency of one region on the
/// canvas, zero outside the region.
SaliencyMap region_saliency(const ScorePair& scores, const RegionSpec& spec,
                            int canvas_w, int canvas_h);

/// S_n = max(sum_m S_{m,n}, 0) pixel-wise.
SaliencyMap scale_fuse(const std::vector<SaliencyMap>& maps);

/// Divide by the max when it exceeds delta, else return the zero map.
SaliencyMap normalize(const SaliencyMap& map, double delta = 1e-12);

SaliencyMap weighted_fuse(const std::vector<SaliencyMap>& maps, const FusionWeights& w);

/// H = -sum_i s_i^2 ln s_i over the fused map, s clamped to
/// [kEntropyClamp, 1] before the log.
double weighted_entropy(const FusionWeights& w, const std::vector<SaliencyMap>& maps);

struct WeightOptimizerConfig {
    int iterations = 200;
    double step = 0.05;
    double stop_delta = 1e-6;  // early stop on ||w_next - w||_inf
};

/// Projected gradient descent of the weighted entropy over the simplex.
/// Runs from the uniform initializer first (ties keep it), then from each
/// vertex; returns the best iterate seen.
FusionWeights optimize_weights(const std::vector<SaliencyMap>& maps,
                               const WeightOptimizerConfig& cfg = {});

/// Euclidean projection onto the probability simplex (sorted-threshold).
std::vector<double> project_simplex(std::vector<double> v);

/// Sobel gradient magnitude of the luminance channel, max-normalized.
SaliencyMap texture_map(const ImageTensor& image);

/// Guided recursive domain-transform filtering: per iteration a horizontal
/// then a vertical pass, each forward and backward, with feedback a^d where
/// d = 1 + (sigma_s/sigma_r)*|dguide|.
SaliencyMap domain_transform(const SaliencyMap& map, const SaliencyMap& guide,
                             double sigma_s, double sigma_r, int iterations);

struct FusionConfig {
    int net_input_size = 64;
    double sigma_s = 10.0;
    double sigma_r = 0.1;
    int dt_iterations = 3;
    int max_crop_edge = kMaxCropEdge;
    WeightOptimizerConfig optimizer;
};

/// Full per-frame saliency: network scores over each (part, scale) crop,
/// signed differencing and additive per-scale fusion, entropy-weighted
/// scale combination, then edge-aware smoothing against the texture guide.
SaliencyMap fuse_pipeline(const ImageTensor& image, const RegionGrid& grid,
                          const SaliencyNet& net, const FusionConfig& cfg = {});

}  // namespace saltrack
