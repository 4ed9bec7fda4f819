#include "saltrack/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace saltrack {

namespace {

inline size_t widx(const ConvLayer& l, int oc, int ic, int ky, int kx) {
    return ((static_cast<size_t>(oc) * l.in_ch + ic) * l.kernel + ky) * l.kernel + kx;
}
inline size_t widx(const TConvLayer& l, int ic, int oc, int ky, int kx) {
    return ((static_cast<size_t>(ic) * l.out_ch + oc) * l.kernel + ky) * l.kernel + kx;
}

void check_finite(const ImageTensor& t, const std::string& layer) {
    for (double v : t.data)
        if (!std::isfinite(v))
            throw NumericError(layer + ": non-finite activation");
}

}  // namespace

ImageTensor conv_forward(const ImageTensor& input, const ConvLayer& layer, ConvCache* cache) {
    if (input.channels != layer.in_ch)
        throw ConfigError(layer.name + ": expected " + std::to_string(layer.in_ch) +
                          " input channels, got " + std::to_string(input.channels));
    int out_h = (input.height + 2 * layer.pad - layer.kernel) / layer.stride + 1;
    int out_w = (input.width + 2 * layer.pad - layer.kernel) / layer.stride + 1;
    if (out_h <= 0 || out_w <= 0)
        throw ConfigError(layer.name + ": non-positive output size for input " +
                          std::to_string(input.height) + "x" + std::to_string(input.width));

    ImageTensor pre(out_h, out_w, layer.out_ch);
    for (int oc = 0; oc < layer.out_ch; ++oc) {
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                double acc = layer.b[oc];
                int iy0 = oy * layer.stride - layer.pad;
                int ix0 = ox * layer.stride - layer.pad;
                for (int ic = 0; ic < layer.in_ch; ++ic) {
                    for (int ky = 0; ky < layer.kernel; ++ky) {
                        int iy = iy0 + ky;
                        if (iy < 0 || iy >= input.height) continue;
                        for (int kx = 0; kx < layer.kernel; ++kx) {
                            int ix = ix0 + kx;
                            if (ix < 0 || ix >= input.width) continue;
                            acc += input.at(ic, iy, ix) * layer.w[widx(layer, oc, ic, ky, kx)];
                        }
                    }
                }
                pre.at(oc, oy, ox) = acc;
            }
        }
    }
    ImageTensor out = pre;
    if (layer.act == Activation::Relu)
        for (double& v : out.data) v = std::max(v, 0.0);
    if (cache) {
        cache->input = input;
        cache->pre = std::move(pre);
    }
    return out;
}

ImageTensor conv_backward(const ImageTensor& d_out, const ConvLayer& layer,
                          const ConvCache& cache, std::vector<double>& d_w,
                          std::vector<double>& d_b) {
    const ImageTensor& input = cache.input;
    ImageTensor d_pre = d_out;
    if (layer.act == Activation::Relu) {
        for (size_t i = 0; i < d_pre.data.size(); ++i)
            if (cache.pre.data[i] <= 0.0) d_pre.data[i] = 0.0;
    }
    ImageTensor d_in(input.height, input.width, input.channels);
    for (int oc = 0; oc < layer.out_ch; ++oc) {
        for (int oy = 0; oy < d_pre.height; ++oy) {
            for (int ox = 0; ox < d_pre.width; ++ox) {
                double g = d_pre.at(oc, oy, ox);
                if (g == 0.0) continue;
                d_b[oc] += g;
                int iy0 = oy * layer.stride - layer.pad;
                int ix0 = ox * layer.stride - layer.pad;
                for (int ic = 0; ic < layer.in_ch; ++ic) {
                    for (int ky = 0; ky < layer.kernel; ++ky) {
                        int iy = iy0 + ky;
                        if (iy < 0 || iy >= input.height) continue;
                        for (int kx = 0; kx < layer.kernel; ++kx) {
                            int ix = ix0 + kx;
                            if (ix < 0 || ix >= input.width) continue;
                            size_t wi = widx(layer, oc, ic, ky, kx);
                            d_w[wi] += g * input.at(ic, iy, ix);
                            d_in.at(ic, iy, ix) += g * layer.w[wi];
                        }
                    }
                }
            }
        }
    }
    return d_in;
}

PoolResult max_pool(const ImageTensor& input, int window, int stride) {
    if (window > input.height || window > input.width)
        throw ConfigError("max_pool: window exceeds spatial dims");
    int out_h = (input.height - window) / stride + 1;
    int out_w = (input.width - window) / stride + 1;
    PoolResult r;
    r.out = ImageTensor(out_h, out_w, input.channels);
    r.argmax.assign(static_cast<size_t>(out_h) * out_w * input.channels, 0);
    r.in_h = input.height;
    r.in_w = input.width;
    for (int c = 0; c < input.channels; ++c) {
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                int32_t best_idx = 0;
                for (int ky = 0; ky < window; ++ky) {
                    for (int kx = 0; kx < window; ++kx) {
                        int iy = oy * stride + ky;
                        int ix = ox * stride + kx;
                        double v = input.at(c, iy, ix);
                        if (v > best) {
                            best = v;
                            best_idx = static_cast<int32_t>(
                                (static_cast<size_t>(c) * input.height + iy) * input.width + ix);
                        }
                    }
                }
                r.out.at(c, oy, ox) = best;
                r.argmax[(static_cast<size_t>(c) * out_h + oy) * out_w + ox] = best_idx;
            }
        }
    }
    return r;
}

ImageTensor max_pool_backward(const ImageTensor& d_out, const PoolResult& pooled,
                              int channels) {
    ImageTensor d_in(pooled.in_h, pooled.in_w, channels);
    for (size_t i = 0; i < d_out.data.size(); ++i)
        d_in.data[pooled.argmax[i]] += d_out.data[i];
    return d_in;
}

ImageTensor transposed_conv(const ImageTensor& input, const TConvLayer& layer) {
    if (input.channels != layer.in_ch)
        throw ConfigError(layer.name + ": expected " + std::to_string(layer.in_ch) +
                          " input channels, got " + std::to_string(input.channels));
    int out_h = input.height * layer.stride;
    int out_w = input.width * layer.stride;
    int crop = layer.crop();
    ImageTensor out(out_h, out_w, layer.out_ch);
    for (int ic = 0; ic < layer.in_ch; ++ic) {
        for (int iy = 0; iy < input.height; ++iy) {
            for (int ix = 0; ix < input.width; ++ix) {
                double v = input.at(ic, iy, ix);
                if (v == 0.0) continue;
                for (int oc = 0; oc < layer.out_ch; ++oc) {
                    for (int ky = 0; ky < layer.kernel; ++ky) {
                        int oy = iy * layer.stride + ky - crop;
                        if (oy < 0 || oy >= out_h) continue;
                        for (int kx = 0; kx < layer.kernel; ++kx) {
                            int ox = ix * layer.stride + kx - crop;
                            if (ox < 0 || ox >= out_w) continue;
                            out.at(oc, oy, ox) += v * layer.w[widx(layer, ic, oc, ky, kx)];
                        }
                    }
                }
            }
        }
    }
    return out;
}

ImageTensor transposed_conv_backward(const ImageTensor& d_out, const TConvLayer& layer,
                                     const ImageTensor& input, std::vector<double>& d_w) {
    int crop = layer.crop();
    ImageTensor d_in(input.height, input.width, input.channels);
    for (int ic = 0; ic < layer.in_ch; ++ic) {
        for (int iy = 0; iy < input.height; ++iy) {
            for (int ix = 0; ix < input.width; ++ix) {
                double v = input.at(ic, iy, ix);
                double acc = 0.0;
                for (int oc = 0; oc < layer.out_ch; ++oc) {
                    for (int ky = 0; ky < layer.kernel; ++ky) {
                        int oy = iy * layer.stride + ky - crop;
                        if (oy < 0 || oy >= d_out.height) continue;
                        for (int kx = 0; kx < layer.kernel; ++kx) {
                            int ox = ix * layer.stride + kx - crop;
                            if (ox < 0 || ox >= d_out.width) continue;
                            double g = d_out.at(oc, oy, ox);
                            size_t wi = widx(layer, ic, oc, ky, kx);
                            d_w[wi] += g * v;
                            acc += g * layer.w[wi];
                        }
                    }
                }
                d_in.at(ic, iy, ix) = acc;
            }
        }
    }
    return d_in;
}

LossResult weighted_bce_loss(const ScorePair& pred, const BinaryMask& gt) {
    if (pred.exaction.height != gt.height || pred.exaction.width != gt.width)
        throw UsageError("weighted_bce_loss: prediction/mask size mismatch");
    size_t total = gt.data.size();
    size_t fg = gt.count_foreground();
    LossResult r;
    r.beta = static_cast<double>(fg) / static_cast<double>(total);
    double loss = 0.0;
    for (size_t i = 0; i < total; ++i) {
        if (gt.data[i]) {
            double p = std::clamp(pred.exaction.data[i], kProbClamp, 1.0 - kProbClamp);
            loss -= r.beta * std::log(p);
        } else {
            double p = std::clamp(pred.inhibition.data[i], kProbClamp, 1.0 - kProbClamp);
            loss -= (1.0 - r.beta) * std::log(p);
        }
    }
    r.loss = loss;
    return r;
}

// ---------------------------------------------------------------------------

struct SaliencyNet::ForwardCache {
    ConvCache enc1c, enc2c, enc3c;
    PoolResult pool1, pool2, pool3;
    ConvCache score_main_c, score_skip_c;
    ImageTensor score_main_out;
    ImageTensor fused;
    ImageTensor logits;
    ScorePair probs;
};

SaliencyNet::SaliencyNet(int input_size)
    : enc1("enc1", 3, kWidths[0], 3, 1, 1, Activation::Relu),
      enc2("enc2", kWidths[0], kWidths[1], 3, 1, 1, Activation::Relu),
      enc3("enc3", kWidths[1], kWidths[2], 3, 1, 1, Activation::Relu),
      score_main("score_main", kWidths[2], 2, 1, 1, 0, Activation::Identity),
      score_skip("score_skip", kWidths[1], 2, 1, 1, 0, Activation::Identity),
      up1("up1", 2, 2, 4, 2),
      up2("up2", 2, 2, 8, 4),
      input_size_(input_size) {
    if (input_size < 8 || input_size % 8 != 0)
        throw ConfigError("net input size must be >= 8 and divisible by 8");
    v_enc1_w.assign(enc1.w.size(), 0.0);
    v_enc1_b.assign(enc1.b.size(), 0.0);
    v_enc2_w.assign(enc2.w.size(), 0.0);
    v_enc2_b.assign(enc2.b.size(), 0.0);
    v_enc3_w.assign(enc3.w.size(), 0.0);
    v_enc3_b.assign(enc3.b.size(), 0.0);
    v_score_main_w.assign(score_main.w.size(), 0.0);
    v_score_main_b.assign(score_main.b.size(), 0.0);
    v_score_skip_w.assign(score_skip.w.size(), 0.0);
    v_score_skip_b.assign(score_skip.b.size(), 0.0);
    v_up1_w.assign(up1.w.size(), 0.0);
    v_up2_w.assign(up2.w.size(), 0.0);
}

SaliencyNet SaliencyNet::random_init(int input_size, uint64_t seed) {
    SaliencyNet net(input_size);
    RandomSource rng(seed);
    auto fill_conv = [&rng](ConvLayer& l) {
        double scale = 1.0 / std::sqrt(static_cast<double>(l.in_ch) * l.kernel * l.kernel);
        for (double& v : l.w) v = rng.uniform(-scale, scale);
        // biases stay zero
    };
    auto fill_tconv = [&rng](TConvLayer& l) {
        double scale = 1.0 / std::sqrt(static_cast<double>(l.in_ch) * l.kernel * l.kernel);
        for (double& v : l.w) v = rng.uniform(-scale, scale);
    };
    fill_conv(net.enc1);
    fill_conv(net.enc2);
    fill_conv(net.enc3);
    fill_conv(net.score_main);
    fill_conv(net.score_skip);
    fill_tconv(net.up1);
    fill_tconv(net.up2);
    return net;
}

ScorePair SaliencyNet::forward(const ImageTensor& image) const {
    return forward_impl(image, nullptr);
}

ScorePair SaliencyNet::forward_impl(const ImageTensor& image, ForwardCache* fc) const {
    if (image.height < 8 || image.width < 8 || image.height % 8 != 0 || image.width % 8 != 0)
        throw ConfigError("forward: input dims must be >= 8 and divisible by 8");
    ForwardCache local;
    ForwardCache& c = fc ? *fc : local;

    ImageTensor a1 = conv_forward(image, enc1, &c.enc1c);
    check_finite(a1, "enc1");
    c.pool1 = max_pool(a1, 2, 2);
    ImageTensor a2 = conv_forward(c.pool1.out, enc2, &c.enc2c);
    check_finite(a2, "enc2");
    c.pool2 = max_pool(a2, 2, 2);
    ImageTensor a3 = conv_forward(c.pool2.out, enc3, &c.enc3c);
    check_finite(a3, "enc3");
    c.pool3 = max_pool(a3, 2, 2);

    c.score_main_out = conv_forward(c.pool3.out, score_main, &c.score_main_c);
    check_finite(c.score_main_out, "score_main");
    ImageTensor up1_out = transposed_conv(c.score_main_out, up1);
    check_finite(up1_out, "up1");
    ImageTensor skip = conv_forward(c.pool2.out, score_skip, &c.score_skip_c);
    check_finite(skip, "score_skip");

    c.fused = up1_out;
    for (size_t i = 0; i < c.fused.data.size(); ++i) c.fused.data[i] += skip.data[i];

    c.logits = transposed_conv(c.fused, up2);
    check_finite(c.logits, "up2");

    int h = c.logits.height, w = c.logits.width;
    ScorePair out{SaliencyMap(h, w, SaliencyStage::Normalized),
                  SaliencyMap(h, w, SaliencyStage::Normalized)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double z0 = c.logits.at(0, y, x);
            double z1 = c.logits.at(1, y, x);
            double m = std::max(z0, z1);
            double e0 = std::exp(z0 - m);
            double e1 = std::exp(z1 - m);
            double pe = e0 / (e0 + e1);
            out.exaction.at(y, x) = pe;
            out.inhibition.at(y, x) = 1.0 - pe;
        }
    }
    if (fc) fc->probs = out;
    return out;
}

NetGradients SaliencyNet::zero_gradients() const {
    NetGradients g;
    g.g.resize(12);
    g.g[0].assign(enc1.w.size(), 0.0);
    g.g[1].assign(enc1.b.size(), 0.0);
    g.g[2].assign(enc2.w.size(), 0.0);
    g.g[3].assign(enc2.b.size(), 0.0);
    g.g[4].assign(enc3.w.size(), 0.0);
    g.g[5].assign(enc3.b.size(), 0.0);
    g.g[6].assign(score_main.w.size(), 0.0);
    g.g[7].assign(score_main.b.size(), 0.0);
    g.g[8].assign(score_skip.w.size(), 0.0);
    g.g[9].assign(score_skip.b.size(), 0.0);
    g.g[10].assign(up1.w.size(), 0.0);
    g.g[11].assign(up2.w.size(), 0.0);
    return g;
}

NetGradients SaliencyNet::backward(const ImageTensor& image, const BinaryMask& gt,
                                   double* loss_out, bool decoder_only) const {
    ForwardCache fc;
    ScorePair probs = forward_impl(image, &fc);
    LossResult lr = weighted_bce_loss(probs, gt);
    if (loss_out) *loss_out = lr.loss;

    NetGradients grads = zero_gradients();

    // loss gradient at the logits, respecting the probability clamp
    int h = fc.logits.height, w = fc.logits.width;
    ImageTensor d_logits(h, w, 2);
    double beta = lr.beta;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double pe = probs.exaction.at(y, x);
            double pi = probs.inhibition.at(y, x);
            if (gt.at(y, x)) {
                if (pe > kProbClamp && pe < 1.0 - kProbClamp) {
                    d_logits.at(0, y, x) = -beta * pi;
                    d_logits.at(1, y, x) = beta * pi;
                }
            } else {
                if (pi > kProbClamp && pi < 1.0 - kProbClamp) {
                    d_logits.at(0, y, x) = (1.0 - beta) * pe;
                    d_logits.at(1, y, x) = -(1.0 - beta) * pe;
                }
            }
        }
    }

    ImageTensor d_fused = transposed_conv_backward(d_logits, up2, fc.fused, grads.g[11]);
    // fusion is an addition: both branches receive d_fused
    ImageTensor d_score_main_out =
        transposed_conv_backward(d_fused, up1, fc.score_main_out, grads.g[10]);
    ImageTensor d_pool3 =
        conv_backward(d_score_main_out, score_main, fc.score_main_c, grads.g[6], grads.g[7]);
    ImageTensor d_pool2_skip =
        conv_backward(d_fused, score_skip, fc.score_skip_c, grads.g[8], grads.g[9]);

    if (!decoder_only) {
        ImageTensor d_a3 = max_pool_backward(d_pool3, fc.pool3, kWidths[2]);
        ImageTensor d_pool2 = conv_backward(d_a3, enc3, fc.enc3c, grads.g[4], grads.g[5]);
        for (size_t i = 0; i < d_pool2.data.size(); ++i)
            d_pool2.data[i] += d_pool2_skip.data[i];
        ImageTensor d_a2 = max_pool_backward(d_pool2, fc.pool2, kWidths[1]);
        ImageTensor d_pool1 = conv_backward(d_a2, enc2, fc.enc2c, grads.g[2], grads.g[3]);
        ImageTensor d_a1 = max_pool_backward(d_pool1, fc.pool1, kWidths[0]);
        conv_backward(d_a1, enc1, fc.enc1c, grads.g[0], grads.g[1]);
    }
    return grads;
}

std::vector<SaliencyNet::ParamRef> SaliencyNet::params() {
    return {
        {&enc1.w, &v_enc1_w, false, "enc1.w"},
        {&enc1.b, &v_enc1_b, false, "enc1.b"},
        {&enc2.w, &v_enc2_w, false, "enc2.w"},
        {&enc2.b, &v_enc2_b, false, "enc2.b"},
        {&enc3.w, &v_enc3_w, false, "enc3.w"},
        {&enc3.b, &v_enc3_b, false, "enc3.b"},
        {&score_main.w, &v_score_main_w, true, "score_main.w"},
        {&score_main.b, &v_score_main_b, true, "score_main.b"},
        {&score_skip.w, &v_score_skip_w, true, "score_skip.w"},
        {&score_skip.b, &v_score_skip_b, true, "score_skip.b"},
        {&up1.w, &v_up1_w, true, "up1.w"},
        {&up2.w, &v_up2_w, true, "up2.w"},
    };
}

std::vector<const std::vector<double>*> SaliencyNet::param_values() const {
    return {&enc1.w, &enc1.b, &enc2.w, &enc2.b, &enc3.w, &enc3.b,
            &score_main.w, &score_main.b, &score_skip.w, &score_skip.b,
            &up1.w, &up2.w};
}

void SaliencyNet::sgd_step(const NetGradients& grads, double lr, double momentum,
                           double weight_decay, bool decoder_only) {
    if (lr <= 0.0) throw UsageError("sgd_step: learning rate must be positive");
    auto refs = params();
    for (size_t p = 0; p < refs.size(); ++p) {
        if (decoder_only && !refs[p].decoder) continue;
        auto& w = *refs[p].values;
        auto& v = *refs[p].velocity;
        const auto& g = grads.g[p];
        for (size_t i = 0; i < w.size(); ++i) {
            v[i] = momentum * v[i] + (g[i] + weight_decay * w[i]);
            w[i] -= lr * v[i];
        }
    }
}

TrainReport SaliencyNet::train(const std::vector<std::pair<ImageTensor, BinaryMask>>& pairs,
                               int iterations, double lr, double momentum,
                               double weight_decay) {
    if (pairs.empty()) throw UsageError("train: need at least one pair");
    TrainReport report;
    report.loss_trace.reserve(iterations);
    for (int it = 0; it < iterations; ++it) {
        const auto& [img, gt] = pairs[it % pairs.size()];
        double loss = 0.0;
        NetGradients grads;
        try {
            grads = backward(img, gt, &loss);
        } catch (const NumericError& e) {
            throw TrainingError("training diverged at iteration " + std::to_string(it) +
                                ": " + e.what());
        }
        if (!std::isfinite(loss))
            throw TrainingError("training diverged at iteration " + std::to_string(it));
        report.loss_trace.push_back(loss);
        sgd_step(grads, lr, momentum, weight_decay);
    }
    return report;
}

// --- checkpoint container ---------------------------------------------------
// magic "TFCN", u32 version, u32 input_size, u32 widths[3], u32 tensor count,
// then per tensor u32 count + f32 little-endian values, declaration order.

namespace {

void put_u32(std::ofstream& f, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    if (!f.read(reinterpret_cast<char*>(b), 4))
        throw IoError("truncated checkpoint: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32(std::ofstream& f, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(f, bits);
}

float get_f32(std::ifstream& f, const std::string& path) {
    uint32_t bits = get_u32(f, path);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

constexpr uint32_t kCheckpointVersion = 1;

}  // namespace

void SaliencyNet::save_checkpoint(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint for writing: " + path);
    f.write("TFCN", 4);
    put_u32(f, kCheckpointVersion);
    put_u32(f, static_cast<uint32_t>(input_size_));
    for (int wdt : kWidths) put_u32(f, static_cast<uint32_t>(wdt));
    auto tensors = param_values();
    put_u32(f, static_cast<uint32_t>(tensors.size()));
    for (const auto* t : tensors) {
        put_u32(f, static_cast<uint32_t>(t->size()));
        for (double v : *t) put_f32(f, static_cast<float>(v));
    }
    if (!f) throw IoError("checkpoint write failed: " + path);
}

SaliencyNet SaliencyNet::load_checkpoint(const std::string& path,
                                         const SaliencyNet* expected_topology) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "TFCN", 4) != 0)
        throw IoError("not a TFCN checkpoint: " + path);
    uint32_t version = get_u32(f, path);
    if (version != kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    uint32_t input_size = get_u32(f, path);
    uint32_t widths[3];
    for (auto& wdt : widths) wdt = get_u32(f, path);
    for (int i = 0; i < 3; ++i)
        if (widths[i] != static_cast<uint32_t>(kWidths[i]))
            throw ConfigError("checkpoint topology mismatch (layer widths): " + path);
    if (input_size < 8 || input_size % 8 != 0)
        throw ConfigError("checkpoint topology invalid input size: " + path);
    if (expected_topology &&
        expected_topology->input_size() != static_cast<int>(input_size))
        throw ConfigError("checkpoint input size " + std::to_string(input_size) +
                          " does not match expected " +
                          std::to_string(expected_topology->input_size()));

    SaliencyNet net(static_cast<int>(input_size));
    auto refs = net.params();
    uint32_t n_tensors = get_u32(f, path);
    if (n_tensors != refs.size())
        throw ConfigError("checkpoint topology mismatch (tensor count): " + path);
    for (auto& ref : refs) {
        uint32_t count = get_u32(f, path);
        if (count != ref.values->size())
            throw ConfigError(std::string("checkpoint topology mismatch (") + ref.name +
                              "): " + path);
        for (auto& v : *ref.values) v = static_cast<double>(get_f32(f, path));
    }
    return net;
}

ImageTensor preprocess_image(const ImageTensor& rgb01, int net_size) {
    if (rgb01.channels != 3)
        throw UsageError("preprocess_image: expected 3 channels");
    ImageTensor out = resize_bilinear(rgb01, net_size, net_size);
    for (double& v : out.data) v -= 0.5;
    return out;
}

BinaryMask preprocess_mask(const BinaryMask& mask, int net_size) {
    return resize_nearest(mask, net_size, net_size);
}

}  // namespace saltrack
