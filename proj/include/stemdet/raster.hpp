#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stemdet/geometry.hpp"

namespace stemdet {

enum class Channels : int { Gray = 1, RGB = 3, RGBN = 4 };

inline int channel_count(Channels c) { return static_cast<int>(c); }

// 8-bit raster, row-major, channels interleaved. Immutable in practice:
// every pipeline stage builds a new raster instead of mutating one.
class Image {
public:
    Image(int width, int height, Channels channels);

    int width() const { return width_; }
    int height() const { return height_; }
    Channels channels() const { return channels_; }
    int channel_count() const { return stemdet::channel_count(channels_); }

    std::uint8_t at(int row, int col, int ch = 0) const {
        return data_[index(row, col, ch)];
    }
    std::uint8_t& at(int row, int col, int ch = 0) {
        return data_[index(row, col, ch)];
    }

    const std::vector<std::uint8_t>& data() const { return data_; }
    std::vector<std::uint8_t>& data() { return data_; }

    friend bool operator==(const Image& a, const Image& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ &&
               a.channels_ == b.channels_ && a.data_ == b.data_;
    }

private:
    std::size_t index(int row, int col, int ch) const {
        return (static_cast<std::size_t>(row) * width_ + col) * channel_count() + ch;
    }

    int width_;
    int height_;
    Channels channels_;
    std::vector<std::uint8_t> data_;
};

// Per-pixel signed index values (ExG, NDVI, ...) plus the theoretical
// domain they live in; the domain drives 256-bin quantization.
class GrayMap {
public:
    GrayMap(int width, int height, float domain_min, float domain_max);

    int width() const { return width_; }
    int height() const { return height_; }
    float domain_min() const { return domain_min_; }
    float domain_max() const { return domain_max_; }

    float at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
    float& at(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }

    const std::vector<float>& values() const { return values_; }

private:
    int width_;
    int height_;
    float domain_min_;
    float domain_max_;
    std::vector<float> values_;
};

// Boolean raster; true marks vegetation.
class BinaryMask {
public:
    BinaryMask(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }

    bool at(int row, int col) const { return bits_[static_cast<std::size_t>(row) * width_ + col] != 0; }
    void set(int row, int col, bool v) { bits_[static_cast<std::size_t>(row) * width_ + col] = v ? 1 : 0; }

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < height_ && col >= 0 && col < width_;
    }

    std::size_t count() const;

    friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.bits_ == b.bits_;
    }
    friend bool operator!=(const BinaryMask& a, const BinaryMask& b) { return !(a == b); }

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> bits_;
};

struct LoadOptions {
    // Reinterpret the 4th PNG channel (alpha) as near-infrared.
    bool nir_in_alpha = false;
};

// Reads PNG or binary PPM/PGM (P5/P6). Only 8-bit samples are accepted.
Image load_image(const std::string& path, const LoadOptions& opts = {});

// Writes PNG (".png") or PNM (anything else: PGM for gray, PPM for RGB).
void save_image(const Image& image, const std::string& path);

// Mask file: grayscale, true -> 255, false -> 0. Reloading and
// thresholding at 128 reproduces the mask bit-exactly.
void save_mask(const BinaryMask& mask, const std::string& path);

// BT.601 integer luma; gray images pass through.
Image to_gray(const Image& image);

// Grayscale image as an index map over the [0, 255] domain.
GrayMap gray_to_map(const Image& image);

} // namespace stemdet
