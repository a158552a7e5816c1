#include "stemdet/raster.hpp"

#include <algorithm>
#include <stdexcept>

namespace stemdet {

Image::Image(int width, int height, Channels channels)
    : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("image dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height * channel_count(), 0);
}

GrayMap::GrayMap(int width, int height, float domain_min, float domain_max)
    : width_(width), height_(height), domain_min_(domain_min), domain_max_(domain_max) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("map dimensions must be positive");
    if (!(domain_min < domain_max))
        throw std::invalid_argument("invalid value domain");
    values_.assign(static_cast<std::size_t>(width) * height, 0.0f);
}

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("mask dimensions must be positive");
    bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Image to_gray(const Image& image) {
    if (image.channels() == Channels::Gray) return image;
    Image out(image.width(), image.height(), Channels::Gray);
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            const int luma = (77 * image.at(r, c, 0) + 150 * image.at(r, c, 1) +
                              29 * image.at(r, c, 2) + 128) >> 8;
            out.at(r, c) = static_cast<std::uint8_t>(luma);
        }
    }
    return out;
}

GrayMap gray_to_map(const Image& image) {
    if (image.channels() != Channels::Gray)
        throw std::invalid_argument("gray_to_map expects a grayscale image");
    GrayMap map(image.width(), image.height(), 0.0f, 255.0f);
    for (int r = 0; r < image.height(); ++r)
        for (int c = 0; c < image.width(); ++c)
            map.at(r, c) = static_cast<float>(image.at(r, c));
    return map;
}

} // namespace stemdet
