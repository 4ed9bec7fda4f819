#pragma once

#include <string>
#include <utility>
#include <vector>

#include "saltrack/tensor.hpp"

namespace saltrack {

enum class Activation { Identity, Relu };

/// 2-D convolution layer parameters. Filters are laid out
/// [out_ch][in_ch][k][k], biases [out_ch].
struct ConvLayer {
    std::string name;
    int in_ch = 0, out_ch = 0;
    int kernel = 1, stride = 1, pad = 0;
    Activation act = Activation::Identity;
    std::vector<double> w;
    std::vector<double> b;

    ConvLayer() = default;
    ConvLayer(std::string n, int ic, int oc, int k, int s, int p, Activation a)
        : name(std::move(n)), in_ch(ic), out_ch(oc), kernel(k), stride(s), pad(p), act(a),
          w(static_cast<size_t>(oc) * ic * k * k, 0.0), b(oc, 0.0) {}
};

/// Transposed convolution: output = stride * input per axis, realized as the
/// full scatter (adjoint of a strided conv) followed by a symmetric crop of
/// (kernel - stride)/2. Filters are [in_ch][out_ch][k][k]; no bias.
struct TConvLayer {
    std::string name;
    int in_ch = 0, out_ch = 0;
    int kernel = 2, stride = 2;
    std::vector<double> w;

    TConvLayer() = default;
    TConvLayer(std::string n, int ic, int oc, int k, int s)
        : name(std::move(n)), in_ch(ic), out_ch(oc), kernel(k), stride(s),
          w(static_cast<size_t>(ic) * oc * k * k, 0.0) {
        if (k < s || (k - s) % 2 != 0)
            throw ConfigError(name + ": transposed conv needs kernel >= stride with even difference");
    }
    int crop() const { return (kernel - stride) / 2; }
};

struct ConvCache {
    ImageTensor input;
    ImageTensor pre;  // pre-activation
};

struct PoolResult {
    ImageTensor out;
    std::vector<int32_t> argmax;  // flat input index per output element
    int in_h = 0, in_w = 0;
};

ImageTensor conv_forward(const ImageTensor& input, const ConvLayer& layer,
                         ConvCache* cache = nullptr);
ImageTensor conv_backward(const ImageTensor& d_out, const ConvLayer& layer,
                          const ConvCache& cache, std::vector<double>& d_w,
                          std::vector<double>& d_b);

PoolResult max_pool(const ImageTensor& input, int window, int stride);
ImageTensor max_pool_backward(const ImageTensor& d_out, const PoolResult& pooled,
                              int channels);

ImageTensor transposed_conv(const ImageTensor& input, const TConvLayer& layer);
ImageTensor transposed_conv_backward(const ImageTensor& d_out, const TConvLayer& layer,
                                     const ImageTensor& input, std::vector<double>& d_w);

/// Per-pixel two-class softmax probabilities at input resolution.
/// exaction = foreground channel, inhibition = background channel;
/// they sum to 1 per pixel.
struct ScorePair {
    SaliencyMap exaction;
    SaliencyMap inhibition;
};

struct LossResult {
    double loss = 0.0;
    double beta = 0.0;  // foreground fraction |Y+|/(|Y+|+|Y-|)
};

LossResult weighted_bce_loss(const ScorePair& pred, const BinaryMask& gt);

/// Probability clamp applied before every log in the loss.
inline constexpr double kProbClamp = 1e-6;

class SaliencyNet;

/// One gradient tensor per parameter tensor, in declaration order.
struct NetGradients {
    std::vector<std::vector<double>> g;
};

struct TrainReport {
    std::vector<double> loss_trace;  // one entry per iteration
};

/// Encoder-decoder saliency network: three conv+pool encoder blocks
/// (widths 8/16/32), 1x1 scoring at the coarsest scale, an additive skip
/// from block 2 through its own 1x1 score conv, and two transposed convs
/// back to input resolution. Two output channels, softmaxed per pixel.
class SaliencyNet {
  public:
    static constexpr int kWidths[3] = {8, 16, 32};

    explicit SaliencyNet(int input_size = 64);

    /// Seeded uniform init scaled by 1/sqrt(fan-in); biases zero.
    static SaliencyNet random_init(int input_size, uint64_t seed);

    int input_size() const { return input_size_; }

    /// Requires height/width >= 8 and divisible by 8, 3 channels,
    /// mean-subtracted values.
    ScorePair forward(const ImageTensor& image) const;

    /// Analytic gradient of weighted_bce_loss over every parameter.
    /// decoder_only skips the encoder blocks (their gradient slots stay zero).
    NetGradients backward(const ImageTensor& image, const BinaryMask& gt,
                          double* loss_out = nullptr, bool decoder_only = false) const;

    /// v <- momentum*v + (g + weight_decay*w); w <- w - lr*v.
    void sgd_step(const NetGradients& grads, double lr, double momentum,
                  double weight_decay, bool decoder_only = false);

    /// Deterministic SGD over pairs in round-robin order; pairs must already
    /// be at network geometry (mean-subtracted images, binary masks).
    TrainReport train(const std::vector<std::pair<ImageTensor, BinaryMask>>& pairs,
                      int iterations, double lr, double momentum, double weight_decay);

    NetGradients zero_gradients() const;

    void save_checkpoint(const std::string& path) const;
    static SaliencyNet load_checkpoint(const std::string& path,
                                       const SaliencyNet* expected_topology = nullptr);

    /// Parameter tensors in declaration order, paired with whether the layer
    /// belongs to the decoder (fine-tunable) side.
    struct ParamRef {
        std::vector<double>* values;
        std::vector<double>* velocity;
        bool decoder;
        const char* name;
    };
    std::vector<ParamRef> params();
    std::vector<const std::vector<double>*> param_values() const;

    ConvLayer enc1, enc2, enc3;
    ConvLayer score_main, score_skip;
    TConvLayer up1, up2;

  private:
    struct ForwardCache;
    ScorePair forward_impl(const ImageTensor& image, ForwardCache* cache) const;

    int input_size_;
    // momentum buffers, shapes mirror the parameter tensors
    std::vector<double> v_enc1_w, v_enc1_b, v_enc2_w, v_enc2_b, v_enc3_w, v_enc3_b;
    std::vector<double> v_score_main_w, v_score_main_b, v_score_skip_w, v_score_skip_b;
    std::vector<double> v_up1_w, v_up2_w;
};

/// Bilinear resize to net geometry and subtract the fixed 0.5 channel mean.
ImageTensor preprocess_image(const ImageTensor& rgb01, int net_size);
BinaryMask preprocess_mask(const BinaryMask& mask, int net_size);

}  // namespace saltrack
