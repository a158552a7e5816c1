#pragma once

#include <span>
#include <string>

#include "stemdet/detection.hpp"
#include "stemdet/raster.hpp"

namespace stemdet {

// RGB PNG with overlays: contour (green), hull (red), cut-off points
// (blue) and a stem marker (magenta cross) per detection, clamped to the
// image border. Pure visualization; with no objects the pixels are
// identical to the input.
void save_annotated(const Image& image, std::span<const PlantObject> objects,
                    std::span<const StemDetection> stems, const std::string& path);

} // namespace stemdet
