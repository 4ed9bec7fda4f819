#pragma once

#include <string>

#include "saltrack/tensor.hpp"

namespace saltrack {

/// Decodes 8-bit PGM (P5), PPM (P6) and non-interlaced 8-bit gray/RGB PNG.
/// Values scaled to [0,1]; grayscale replicated to 3 channels.
ImageTensor load_image(const std::string& path);

/// Same decoders; pixel value > 127 maps to foreground.
BinaryMask load_mask(const std::string& path);

/// 8-bit grayscale PNG, pixel = round(255 * value) (half away from zero).
void save_saliency_png(const std::string& path, const SaliencyMap& map);
void save_mask_png(const std::string& path, const BinaryMask& mask);

/// Raw helpers used by the tests as well: interleaved 8-bit rows.
struct RawImage {
    int width = 0, height = 0, channels = 0;  // channels 1 or 3
    std::vector<uint8_t> pixels;              // row-major, interleaved
};

RawImage decode_image_file(const std::string& path);
void encode_gray_png(const std::string& path, const RawImage& img);

}  // namespace saltrack
