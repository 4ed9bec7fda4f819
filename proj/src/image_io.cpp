#include "saltrack/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

namespace saltrack {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

// --- PNM (P5 gray / P6 rgb) -------------------------------------------------

int pnm_token(const std::vector<uint8_t>& b, size_t& pos, const std::string& path) {
    while (pos < b.size()) {
        if (std::isspace(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    if (pos >= b.size() || !std::isdigit(b[pos]))
        throw IoError("malformed PNM header: " + path);
    int v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
        v = v * 10 + (b[pos] - '0');
        if (v > 1 << 28) throw IoError("malformed PNM header: " + path);
        ++pos;
    }
    return v;
}

RawImage decode_pnm(const std::vector<uint8_t>& bytes, const std::string& path) {
    RawImage img;
    img.channels = bytes[1] == '5' ? 1 : 3;
    size_t pos = 2;
    img.width = pnm_token(bytes, pos, path);
    img.height = pnm_token(bytes, pos, path);
    int maxval = pnm_token(bytes, pos, path);
    if (img.width <= 0 || img.height <= 0)
        throw IoError("bad PNM dimensions: " + path);
    if (maxval <= 0 || maxval > 255)
        throw IoError("unsupported PNM maxval (8-bit only): " + path);
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw IoError("malformed PNM header: " + path);
    ++pos;  // single whitespace before the raster
    size_t need = static_cast<size_t>(img.width) * img.height * img.channels;
    if (bytes.size() - pos < need) throw IoError("truncated PNM file: " + path);
    img.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + need);
    if (maxval != 255)
        for (auto& p : img.pixels)
            p = static_cast<uint8_t>(p * 255 / maxval);
    return img;
}

// --- PNG ---------------------------------------------------------------------

const uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

uint32_t be32(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

std::vector<uint8_t> zlib_inflate(const std::vector<uint8_t>& in, size_t expected,
                                  const std::string& path) {
    std::vector<uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw IoError("zlib init failed: " + path);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    size_t produced = out.size() - zs.avail_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected)
        throw IoError("corrupt PNG stream: " + path);
    return out;
}

uint8_t paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<uint8_t>(a);
    if (pb <= pc) return static_cast<uint8_t>(b);
    return static_cast<uint8_t>(c);
}

RawImage decode_png(const std::vector<uint8_t>& bytes, const std::string& path) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
        throw IoError("not a PNG file: " + path);
    RawImage img;
    std::vector<uint8_t> idat;
    bool saw_ihdr = false, saw_iend = false;
    size_t pos = 8;
    while (pos + 8 <= bytes.size() && !saw_iend) {
        uint32_t len = be32(&bytes[pos]);
        if (pos + 12 + len > bytes.size()) throw IoError("truncated PNG file: " + path);
        const uint8_t* type = &bytes[pos + 4];
        const uint8_t* data = &bytes[pos + 8];
        uint32_t crc_stored = be32(&bytes[pos + 8 + len]);
        uint32_t crc_calc = static_cast<uint32_t>(
            crc32(crc32(0, type, 4), data, len));
        if (crc_stored != crc_calc) throw IoError("PNG chunk CRC mismatch: " + path);

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw IoError("bad IHDR: " + path);
            img.width = static_cast<int>(be32(data));
            img.height = static_cast<int>(be32(data + 4));
            int bit_depth = data[8], color_type = data[9];
            int interlace = data[12];
            if (img.width <= 0 || img.height <= 0) throw IoError("bad PNG size: " + path);
            if (bit_depth != 8)
                throw IoError("unsupported PNG bit depth (8-bit only): " + path);
            if (color_type == 0) img.channels = 1;
            else if (color_type == 2) img.channels = 3;
            else throw IoError("unsupported PNG color type (gray/RGB only): " + path);
            if (interlace != 0) throw IoError("interlaced PNG unsupported: " + path);
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_iend = true;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || !saw_iend || idat.empty())
        throw IoError("truncated PNG file: " + path);

    int bpp = img.channels;
    size_t stride = static_cast<size_t>(img.width) * bpp;
    std::vector<uint8_t> raw =
        zlib_inflate(idat, (stride + 1) * img.height, path);

    img.pixels.assign(stride * img.height, 0);
    for (int y = 0; y < img.height; ++y) {
        uint8_t filter = raw[(stride + 1) * y];
        const uint8_t* src = &raw[(stride + 1) * y + 1];
        uint8_t* dst = &img.pixels[stride * y];
        const uint8_t* up = y > 0 ? &img.pixels[stride * (y - 1)] : nullptr;
        for (size_t x = 0; x < stride; ++x) {
            int a = x >= static_cast<size_t>(bpp) ? dst[x - bpp] : 0;
            int b = up ? up[x] : 0;
            int c = (up && x >= static_cast<size_t>(bpp)) ? up[x - bpp] : 0;
            int v;
            switch (filter) {
                case 0: v = src[x]; break;
                case 1: v = src[x] + a; break;
                case 2: v = src[x] + b; break;
                case 3: v = src[x] + (a + b) / 2; break;
                case 4: v = src[x] + paeth(a, b, c); break;
                default: throw IoError("bad PNG filter type: " + path);
            }
            dst[x] = static_cast<uint8_t>(v & 0xff);
        }
    }
    return img;
}

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_chunk(std::vector<uint8_t>& out, const char* type,
               const std::vector<uint8_t>& data) {
    put_be32(out, static_cast<uint32_t>(data.size()));
    size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uint32_t crc = static_cast<uint32_t>(crc32(0, &out[type_at], 4));
    if (!data.empty())
        crc = static_cast<uint32_t>(crc32(crc, data.data(), static_cast<uInt>(data.size())));
    put_be32(out, crc);
}

}  // namespace

RawImage decode_image_file(const std::string& path) {
    std::vector<uint8_t> bytes = read_file(path);
    if (bytes.size() < 2) throw IoError("truncated file: " + path);
    if (bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return decode_pnm(bytes, path);
    if (bytes[0] == 0x89 && bytes.size() >= 8) return decode_png(bytes, path);
    throw IoError("unsupported image format: " + path);
}

void encode_gray_png(const std::string& path, const RawImage& img) {
    if (img.channels != 1) throw UsageError("encode_gray_png: single channel expected");
    std::vector<uint8_t> filtered;
    filtered.reserve((static_cast<size_t>(img.width) + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        filtered.push_back(0);  // filter: none
        const uint8_t* row = &img.pixels[static_cast<size_t>(y) * img.width];
        filtered.insert(filtered.end(), row, row + img.width);
    }
    uLongf comp_cap = compressBound(static_cast<uLong>(filtered.size()));
    std::vector<uint8_t> compressed(comp_cap);
    if (compress2(compressed.data(), &comp_cap, filtered.data(),
                  static_cast<uLong>(filtered.size()), Z_DEFAULT_COMPRESSION) != Z_OK)
        throw IoError("PNG compression failed: " + path);
    compressed.resize(comp_cap);

    std::vector<uint8_t> out(kPngSig, kPngSig + 8);
    std::vector<uint8_t> ihdr;
    put_be32(ihdr, static_cast<uint32_t>(img.width));
    put_be32(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // gray
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // no interlace
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", compressed);
    put_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file for writing: " + path);
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path);
}

ImageTensor load_image(const std::string& path) {
    RawImage raw = decode_image_file(path);
    ImageTensor img(raw.height, raw.width, 3);
    for (int y = 0; y < raw.height; ++y) {
        for (int x = 0; x < raw.width; ++x) {
            size_t base = (static_cast<size_t>(y) * raw.width + x) * raw.channels;
            if (raw.channels == 1) {
                double v = raw.pixels[base] / 255.0;
                img.at(0, y, x) = img.at(1, y, x) = img.at(2, y, x) = v;
            } else {
                img.at(0, y, x) = raw.pixels[base] / 255.0;
                img.at(1, y, x) = raw.pixels[base + 1] / 255.0;
                img.at(2, y, x) = raw.pixels[base + 2] / 255.0;
            }
        }
    }
    return img;
}

BinaryMask load_mask(const std::string& path) {
    RawImage raw = decode_image_file(path);
    BinaryMask mask(raw.height, raw.width);
    for (int y = 0; y < raw.height; ++y)
        for (int x = 0; x < raw.width; ++x)
            mask.at(y, x) =
                raw.pixels[(static_cast<size_t>(y) * raw.width + x) * raw.channels] > 127
                    ? 1
                    : 0;
    return mask;
}

void save_saliency_png(const std::string& path, const SaliencyMap& map) {
    RawImage img;
    img.width = map.width;
    img.height = map.height;
    img.channels = 1;
    img.pixels.resize(map.data.size());
    for (size_t i = 0; i < map.data.size(); ++i) {
        double v = std::round(255.0 * map.data[i]);  // half away from zero
        img.pixels[i] = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    encode_gray_png(path, img);
}

void save_mask_png(const std::string& path, const BinaryMask& mask) {
    RawImage img;
    img.width = mask.width;
    img.height = mask.height;
    img.channels = 1;
    img.pixels.resize(mask.data.size());
    for (size_t i = 0; i < mask.data.size(); ++i)
        img.pixels[i] = mask.data[i] ? 255 : 0;
    encode_gray_png(path, img);
}

}  // namespace saltrack
