#include "stemdet/segmentation.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stemdet {

std::uint64_t Histogram::total() const {
    return std::accumulate(bins.begin(), bins.end(), std::uint64_t{0});
}

int Histogram::nonzero_bins() const {
    int n = 0;
    for (auto b : bins)
        if (b) ++n;
    return n;
}

GrayMap exg(const Image& image) {
    if (image.channels() == Channels::Gray)
        throw std::invalid_argument("exg requires R, G and B channels");
    GrayMap map(image.width(), image.height(), -510.0f, 510.0f);
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            const int v = 2 * image.at(r, c, 1) - image.at(r, c, 0) - image.at(r, c, 2);
            map.at(r, c) = static_cast<float>(v);
        }
    }
    return map;
}

GrayMap ndvi(const Image& image) {
    if (image.channels() != Channels::RGBN)
        throw std::invalid_argument("ndvi requires a NIR channel");
    GrayMap map(image.width(), image.height(), -1.0f, 1.0f);
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            const int nir = image.at(r, c, 3);
            const int red = image.at(r, c, 0);
            // NIR + R = 0 carries no signal; map it to the neutral 0.
            map.at(r, c) = (nir + red == 0)
                               ? 0.0f
                               : static_cast<float>(nir - red) / static_cast<float>(nir + red);
        }
    }
    return map;
}

std::uint8_t quantize_value(float v, float domain_min, float domain_max) {
    const double scaled = (static_cast<double>(v) - domain_min) * 255.0 / (domain_max - domain_min);
    const long bin = std::lround(scaled);
    if (bin < 0) return 0;
    if (bin > 255) return 255;
    return static_cast<std::uint8_t>(bin);
}

Histogram quantize(const GrayMap& map) {
    Histogram hist;
    for (float v : map.values())
        ++hist.bins[quantize_value(v, map.domain_min(), map.domain_max())];
    return hist;
}

int otsu_threshold(const Histogram& hist) {
    if (hist.nonzero_bins() < 2) throw std::runtime_error("no threshold exists");

    std::int64_t total = 0, total_moment = 0;
    for (int b = 0; b < 256; ++b) {
        total += static_cast<std::int64_t>(hist.bins[b]);
        total_moment += static_cast<std::int64_t>(b) * static_cast<std::int64_t>(hist.bins[b]);
    }

    // Between-class variance is proportional to D^2 / (n0 * n1) with
    // D = s0*N - S*n0; the moments stay in exact integer arithmetic and
    // only the final ratio is evaluated in floating point.
    int best_t = -1;
    double best_score = -1.0;
    std::int64_t n0 = 0, s0 = 0;
    for (int t = 0; t < 256; ++t) {
        n0 += static_cast<std::int64_t>(hist.bins[t]);
        s0 += static_cast<std::int64_t>(t) * static_cast<std::int64_t>(hist.bins[t]);
        const std::int64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const std::int64_t d = s0 * total - total_moment * n0;
        const double score = static_cast<double>(d) * static_cast<double>(d) /
                             (static_cast<double>(n0) * static_cast<double>(n1));
        if (score > best_score) {
            best_score = score;
            best_t = t;
        }
    }
    return best_t;
}

int triangle_threshold(const Histogram& hist) {
    if (hist.nonzero_bins() < 2) throw std::runtime_error("no threshold exists");

    int lo = 0, hi = 255;
    while (hist.bins[lo] == 0) ++lo;
    while (hist.bins[hi] == 0) --hi;

    int peak = lo;
    for (int b = lo; b <= hi; ++b)
        if (hist.bins[b] > hist.bins[peak]) peak = b;

    // The farthest occupied bin from the peak; ties toward the smaller bin.
    const int tail = (peak - lo >= hi - peak) ? lo : hi;

    const int from = std::min(peak, tail), to = std::max(peak, tail);
    const std::int64_t dx = tail - peak;
    const std::int64_t dy = static_cast<std::int64_t>(hist.bins[tail]) -
                            static_cast<std::int64_t>(hist.bins[peak]);

    // Perpendicular distance to the peak-tail chord is |cross| / |chord|;
    // the chord length is constant, so the argmax works on exact |cross|.
    int best_bin = from;
    std::int64_t best_cross = -1;
    for (int b = from; b <= to; ++b) {
        const std::int64_t hy = static_cast<std::int64_t>(hist.bins[b]) -
                                static_cast<std::int64_t>(hist.bins[peak]);
        const std::int64_t cross = std::llabs(dx * hy - dy * (b - peak));
        if (cross > best_cross) {
            best_cross = cross;
            best_bin = b;
        }
    }
    return best_bin;
}

BinaryMask binarize(const GrayMap& map, int threshold) {
    BinaryMask mask(map.width(), map.height());
    for (int r = 0; r < map.height(); ++r)
        for (int c = 0; c < map.width(); ++c)
            mask.set(r, c, quantize_value(map.at(r, c), map.domain_min(), map.domain_max()) > threshold);
    return mask;
}

BinaryMask segment(const Image& image, const SegmentationConfig& config) {
    if (config.index == VegIndex::External) {
        // Externally produced masks: grayscale, vegetation bright.
        return binarize(gray_to_map(to_gray(image)), 128);
    }
    const GrayMap map = config.index == VegIndex::ExG ? exg(image) : ndvi(image);
    int threshold;
    switch (config.thresholder) {
        case Thresholder::Otsu: threshold = otsu_threshold(quantize(map)); break;
        case Thresholder::Triangle: threshold = triangle_threshold(quantize(map)); break;
        case Thresholder::Fixed: threshold = config.fixed_threshold; break;
        default: throw std::invalid_argument("unknown thresholder");
    }
    return binarize(map, threshold);
}

} // namespace stemdet
