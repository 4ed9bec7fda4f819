#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace saltrack {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };
struct TrainingError : Error { using Error::Error; };
struct EmptyMaskError : Error { using Error::Error; };
struct TargetLostError : Error { using Error::Error; };
struct DegenerateRegionError : Error { using Error::Error; };

/// Dense channel-planar image: data[c*h*w + y*w + x]. RGB content lives in
/// [0,1] after ingestion; network tensors hold whatever the layers produce.
struct ImageTensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    ImageTensor() = default;
    ImageTensor(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    double& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    double at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    size_t size() const { return data.size(); }
};

enum class SaliencyStage { Signed, ScaleFused, Normalized };

/// Single-plane real grid. The stage tag records which range contract the
/// values currently satisfy: signed in [-1,1], scale_fused >= 0,
/// normalized in [0,1].
struct SaliencyMap {
    int height = 0;
    int width = 0;
    SaliencyStage stage = SaliencyStage::Normalized;
    std::vector<double> data;

    SaliencyMap() = default;
    SaliencyMap(int h, int w, SaliencyStage s, double fill = 0.0)
        : height(h), width(w), stage(s),
          data(static_cast<size_t>(h) * w, fill) {}

    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
};

struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;  // strictly {0,1}

    BinaryMask() = default;
    BinaryMask(int h, int w, uint8_t fill = 0)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t count_foreground() const {
        size_t n = 0;
        for (uint8_t v : data) n += v;
        return n;
    }
};

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool empty() const { return w <= 0 || h <= 0; }
    int area() const { return empty() ? 0 : w * h; }
    int x2() const { return x + w; }
    int y2() const { return y + h; }

    Rect clipped(int canvas_w, int canvas_h) const {
        int nx = std::max(x, 0);
        int ny = std::max(y, 0);
        int nx2 = std::min(x + w, canvas_w);
        int ny2 = std::min(y + h, canvas_h);
        return Rect{nx, ny, nx2 - nx, ny2 - ny};
    }
    bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    bool operator==(const Rect& o) const {
        return x == o.x && y == o.y && w == o.w && h == o.h;
    }
};

ImageTensor resize_bilinear(const ImageTensor& src, int out_h, int out_w);
SaliencyMap resize_bilinear(const SaliencyMap& src, int out_h, int out_w);
BinaryMask resize_nearest(const BinaryMask& src, int out_h, int out_w);

/// Deterministic uniform source; all randomness in the library flows
/// through this so seeded runs reproduce bit-identically.
class RandomSource {
  public:
    explicit RandomSource(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    /// Uniform in [0,1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
    }
    /// Uniform in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
    /// Uniform integer in [0,n).
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

  private:
    uint64_t state_;
};

}  // namespace saltrack
