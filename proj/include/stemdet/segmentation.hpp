#pragma once

#include <array>
#include <cstdint>

#include "stemdet/raster.hpp"

namespace stemdet {

// 256-bin histogram over quantized index values.
struct Histogram {
    std::array<std::uint64_t, 256> bins{};

    std::uint64_t total() const;
    int nonzero_bins() const;
};

enum class VegIndex { ExG, NDVI, External };
enum class Thresholder { Otsu, Triangle, Fixed };

struct SegmentationConfig {
    VegIndex index = VegIndex::ExG;
    Thresholder thresholder = Thresholder::Otsu;
    int fixed_threshold = 128; // bin index, used with Thresholder::Fixed
};

// Excess Green, 2G - R - B per pixel, domain [-510, 510].
GrayMap exg(const Image& image);

// Normalized difference (NIR - R) / (NIR + R), domain [-1, 1];
// zero-denominator pixels map to 0.
GrayMap ndvi(const Image& image);

// Affine rescale of a value from the map's theoretical domain onto bins
// 0..255 (nearest bin, clamped). binarize() applies the same rule so the
// histogram and the mask always agree.
std::uint8_t quantize_value(float v, float domain_min, float domain_max);

Histogram quantize(const GrayMap& map);

// Threshold maximizing the between-class variance; ties toward smaller t.
// Throws when fewer than two bins are occupied ("no threshold exists").
int otsu_threshold(const Histogram& hist);

// Bin of maximum perpendicular distance from the histogram curve to the
// line joining the peak bin and the farthest nonzero tail bin; ties toward
// the smaller bin. Throws on degenerate histograms.
int triangle_threshold(const Histogram& hist);

// Pixel true iff its quantized bin is strictly above the threshold;
// vegetation is the high-index class for both ExG and NDVI.
BinaryMask binarize(const GrayMap& map, int threshold);

// Full segmentation step: index map, automatic/fixed threshold, mask.
// VegIndex::External expects a grayscale image and binarizes at fixed 128.
BinaryMask segment(const Image& image, const SegmentationConfig& config);

} // namespace stemdet
