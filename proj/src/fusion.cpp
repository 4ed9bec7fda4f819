#include "saltrack/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace saltrack {

SaliencyMap region_saliency(const ScorePair& scores, const RegionSpec& spec,
                            int canvas_w, int canvas_h) {
    SaliencyMap diff(scores.exaction.height, scores.exaction.width, SaliencyStage::Signed);
    for (size_t i = 0; i < diff.data.size(); ++i)
        diff.data[i] = scores.exaction.data[i] - scores.inhibition.data[i];
    return pad_back(diff, spec, canvas_w, canvas_h);
}

SaliencyMap scale_fuse(const std::vector<SaliencyMap>& maps) {
    if (maps.empty()) throw UsageError("scale_fuse: no maps");
    SaliencyMap out(maps[0].height, maps[0].width, SaliencyStage::ScaleFused);
    for (const auto& m : maps) {
        if (m.height != out.height || m.width != out.width)
            throw UsageError("scale_fuse: maps must share the canvas size");
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += m.data[i];
    }
    for (double& v : out.data) v = std::max(v, 0.0);
    return out;
}

SaliencyMap normalize(const SaliencyMap& map, double delta) {
    SaliencyMap out = map;
    out.stage = SaliencyStage::Normalized;
    double mx = 0.0;
    for (double v : map.data) mx = std::max(mx, v);
    if (mx > delta) {
        for (double& v : out.data) v /= mx;
    } else {
        std::fill(out.data.begin(), out.data.end(), 0.0);
    }
    return out;
}

SaliencyMap weighted_fuse(const std::vector<SaliencyMap>& maps, const FusionWeights& w) {
    if (maps.size() != w.w.size())
        throw UsageError("weighted_fuse: weight/map count mismatch");
    if (maps.empty()) throw UsageError("weighted_fuse: no maps");
    SaliencyMap out(maps[0].height, maps[0].width, SaliencyStage::Normalized);
    for (size_t n = 0; n < maps.size(); ++n)
        for (size_t i = 0; i < out.data.size(); ++i)
            out.data[i] += w.w[n] * maps[n].data[i];
    return out;
}

double weighted_entropy(const FusionWeights& w, const std::vector<SaliencyMap>& maps) {
    if (maps.size() != w.w.size())
        throw UsageError("weighted_entropy: weight/map count mismatch");
    size_t pixels = maps[0].data.size();
    double h = 0.0;
    for (size_t i = 0; i < pixels; ++i) {
        double s = 0.0;
        for (size_t n = 0; n < maps.size(); ++n) s += w.w[n] * maps[n].data[i];
        s = std::clamp(s, kEntropyClamp, 1.0);
        h -= s * s * std::log(s);
    }
    return h;
}

std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0;
    double theta = 0.0;
    for (size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        double t = (css - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0) theta = t;
    }
    for (double& x : v) x = std::max(x - theta, 0.0);
    return v;
}

namespace {

// dH/dw_n = -sum_i (2 s_i ln s_i + s_i) * (S_n)_i over unclamped pixels
std::vector<double> entropy_gradient(const std::vector<double>& w,
                                     const std::vector<SaliencyMap>& maps) {
    size_t n_maps = maps.size();
    size_t pixels = maps[0].data.size();
    std::vector<double> g(n_maps, 0.0);
    for (size_t i = 0; i < pixels; ++i) {
        double s = 0.0;
        for (size_t n = 0; n < n_maps; ++n) s += w[n] * maps[n].data[i];
        if (s <= kEntropyClamp || s > 1.0) continue;
        double common = 2.0 * s * std::log(s) + s;
        for (size_t n = 0; n < n_maps; ++n) g[n] -= common * maps[n].data[i];
    }
    return g;
}

}  // namespace

FusionWeights optimize_weights(const std::vector<SaliencyMap>& maps,
                               const WeightOptimizerConfig& cfg) {
    if (maps.empty()) throw UsageError("optimize_weights: no maps");
    size_t n = maps.size();
    if (n == 1) return FusionWeights{{1.0}};
    for (const auto& m : maps)
        if (m.data.size() != maps[0].data.size())
            throw UsageError("optimize_weights: maps must share the canvas size");

    FusionWeights best;
    double best_h = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<double>& w) {
        double h = weighted_entropy(FusionWeights{w}, maps);
        if (!std::isfinite(h)) throw NumericError("optimize_weights: non-finite entropy");
        if (h < best_h) {
            best_h = h;
            best.w = w;
        }
    };

    auto descend = [&](std::vector<double> w) {
        consider(w);
        for (int it = 0; it < cfg.iterations; ++it) {
            std::vector<double> g = entropy_gradient(w, maps);
            std::vector<double> next(n);
            for (size_t k = 0; k < n; ++k) next[k] = w[k] - cfg.step * g[k];
            next = project_simplex(std::move(next));
            double delta = 0.0;
            for (size_t k = 0; k < n; ++k) delta = std::max(delta, std::fabs(next[k] - w[k]));
            w = std::move(next);
            consider(w);
            if (delta < cfg.stop_delta) break;
        }
    };

    // uniform first so ties on a constant objective keep it, then the vertices
    // and the uniform/vertex midpoints (the entropy is not convex in w).
    std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    descend(uniform);
    for (size_t v = 0; v < n; ++v) {
        std::vector<double> start(n, 0.0);
        start[v] = 1.0;
        descend(start);
        std::vector<double> mid(n);
        for (size_t k = 0; k < n; ++k) mid[k] = 0.5 * (start[k] + uniform[k]);
        descend(mid);
    }
    return best;
}

SaliencyMap texture_map(const ImageTensor& image) {
    int h = image.height, w = image.width;
    std::vector<double> lum(static_cast<size_t>(h) * w, 0.0);
    if (image.channels == 3) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                lum[static_cast<size_t>(y) * w + x] = 0.299 * image.at(0, y, x) +
                                                      0.587 * image.at(1, y, x) +
                                                      0.114 * image.at(2, y, x);
    } else {
        for (int c = 0; c < image.channels; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    lum[static_cast<size_t>(y) * w + x] += image.at(c, y, x) / image.channels;
    }
    auto L = [&](int y, int x) {
        y = std::clamp(y, 0, h - 1);
        x = std::clamp(x, 0, w - 1);
        return lum[static_cast<size_t>(y) * w + x];
    };
    SaliencyMap guide(h, w, SaliencyStage::Normalized);
    double mx = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double right = L(y - 1, x + 1) + 2 * L(y, x + 1) + L(y + 1, x + 1);
            double left = L(y - 1, x - 1) + 2 * L(y, x - 1) + L(y + 1, x - 1);
            double bottom = L(y + 1, x - 1) + 2 * L(y + 1, x) + L(y + 1, x + 1);
            double top = L(y - 1, x - 1) + 2 * L(y - 1, x) + L(y - 1, x + 1);
            double mag = std::hypot(right - left, bottom - top);
            guide.at(y, x) = mag;
            mx = std::max(mx, mag);
        }
    }
    if (mx > 1e-12)
        for (double& v : guide.data) v /= mx;
    else
        std::fill(guide.data.begin(), guide.data.end(), 0.0);
    return guide;
}

SaliencyMap domain_transform(const SaliencyMap& map, const SaliencyMap& guide,
                             double sigma_s, double sigma_r, int iterations) {
    if (map.height != guide.height || map.width != guide.width)
        throw UsageError("domain_transform: map/guide size mismatch");
    if (sigma_s <= 0 || sigma_r <= 0)
        throw UsageError("domain_transform: sigmas must be positive");
    int h = map.height, w = map.width;
    double ratio = sigma_s / sigma_r;

    // between-neighbor distances, fixed across iterations
    std::vector<double> dh(static_cast<size_t>(h) * w, 0.0);  // (y,x) vs (y,x-1)
    std::vector<double> dv(static_cast<size_t>(h) * w, 0.0);  // (y,x) vs (y-1,x)
    for (int y = 0; y < h; ++y)
        for (int x = 1; x < w; ++x)
            dh[static_cast<size_t>(y) * w + x] =
                1.0 + ratio * std::fabs(guide.at(y, x) - guide.at(y, x - 1));
    for (int y = 1; y < h; ++y)
        for (int x = 0; x < w; ++x)
            dv[static_cast<size_t>(y) * w + x] =
                1.0 + ratio * std::fabs(guide.at(y, x) - guide.at(y - 1, x));

    SaliencyMap out = map;
    double denom = std::sqrt(std::pow(4.0, iterations) - 1.0);
    for (int k = 1; k <= iterations; ++k) {
        double sigma_h = sigma_s * std::sqrt(3.0) * std::pow(2.0, iterations - k) / denom;
        double a = std::exp(-std::sqrt(2.0) / sigma_h);
        // horizontal, forward then backward
        for (int y = 0; y < h; ++y) {
            for (int x = 1; x < w; ++x) {
                double ad = std::pow(a, dh[static_cast<size_t>(y) * w + x]);
                out.at(y, x) = (1.0 - ad) * out.at(y, x) + ad * out.at(y, x - 1);
            }
            for (int x = w - 2; x >= 0; --x) {
                double ad = std::pow(a, dh[static_cast<size_t>(y) * w + x + 1]);
                out.at(y, x) = (1.0 - ad) * out.at(y, x) + ad * out.at(y, x + 1);
            }
        }
        // vertical, forward then backward
        for (int x = 0; x < w; ++x) {
            for (int y = 1; y < h; ++y) {
                double ad = std::pow(a, dv[static_cast<size_t>(y) * w + x]);
                out.at(y, x) = (1.0 - ad) * out.at(y, x) + ad * out.at(y - 1, x);
            }
            for (int y = h - 2; y >= 0; --y) {
                double ad = std::pow(a, dv[static_cast<size_t>(y + 1) * w + x]);
                out.at(y, x) = (1.0 - ad) * out.at(y, x) + ad * out.at(y + 1, x);
            }
        }
    }
    return out;
}

SaliencyMap fuse_pipeline(const ImageTensor& image, const RegionGrid& grid,
                          const SaliencyNet& net, const FusionConfig& cfg) {
    int W = grid.canvas_w, H = grid.canvas_h;
    std::vector<std::vector<SaliencyMap>> per_scale(grid.n_scales);
    for (const auto& spec : grid.specs) {
        ImageTensor crop = crop_region(image, spec, cfg.max_crop_edge);
        ImageTensor net_in = preprocess_image(crop, cfg.net_input_size);
        ScorePair scores = net.forward(net_in);
        per_scale[spec.scale_index - 1].push_back(region_saliency(scores, spec, W, H));
    }
    std::vector<SaliencyMap> scale_maps;
    scale_maps.reserve(grid.n_scales);
    for (const auto& group : per_scale)
        scale_maps.push_back(normalize(scale_fuse(group)));
    FusionWeights w = optimize_weights(scale_maps, cfg.optimizer);
    SaliencyMap fused = weighted_fuse(scale_maps, w);
    SaliencyMap guide = texture_map(image);
    return domain_transform(fused, guide, cfg.sigma_s, cfg.sigma_r, cfg.dt_iterations);
}

}  // namespace saltrack
