#include "stemdet/annotate.hpp"

#include <algorithm>
#include <cmath>

namespace stemdet {

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr Rgb kContour{0, 255, 0};
constexpr Rgb kHull{255, 0, 0};
constexpr Rgb kCutoff{0, 128, 255};
constexpr Rgb kStem{255, 0, 255};

void put(Image& img, int r, int c, Rgb color) {
    if (r < 0 || r >= img.height() || c < 0 || c >= img.width()) return;
    img.at(r, c, 0) = color.r;
    img.at(r, c, 1) = color.g;
    img.at(r, c, 2) = color.b;
}

void draw_line(Image& img, PixelPoint a, PixelPoint b, Rgb color) {
    // Bresenham
    const int dr = std::abs(b.row - a.row), dc = std::abs(b.col - a.col);
    const int sr = a.row < b.row ? 1 : -1, sc = a.col < b.col ? 1 : -1;
    int err = (dc > dr ? dc : -dr) / 2;
    int r = a.row, c = a.col;
    while (true) {
        put(img, r, c, color);
        if (r == b.row && c == b.col) break;
        const int e = err;
        if (e > -dc) {
            err -= dr;
            c += sc;
        }
        if (e < dr) {
            err += dc;
            r += sr;
        }
    }
}

void draw_disc(Image& img, int row, int col, int radius, Rgb color) {
    for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc)
            if (dr * dr + dc * dc <= radius * radius) put(img, row + dr, col + dc, color);
}

void draw_cross(Image& img, int row, int col, int arm, Rgb color) {
    for (int d = -arm; d <= arm; ++d) {
        put(img, row + d, col, color);
        put(img, row, col + d, color);
    }
}

} // namespace

void save_annotated(const Image& image, std::span<const PlantObject> objects,
                    std::span<const StemDetection> stems, const std::string& path) {
    Image canvas(image.width(), image.height(), Channels::RGB);
    const bool gray = image.channels() == Channels::Gray;
    for (int r = 0; r < image.height(); ++r)
        for (int c = 0; c < image.width(); ++c)
            for (int k = 0; k < 3; ++k)
                canvas.at(r, c, k) = gray ? image.at(r, c) : image.at(r, c, k);

    for (const PlantObject& object : objects) {
        for (std::size_t e = 0; e < object.hull.size(); ++e) {
            const PixelPoint a = object.contour[object.hull[e]];
            const PixelPoint b = object.contour[object.hull[(e + 1) % object.hull.size()]];
            draw_line(canvas, a, b, kHull);
        }
        for (const PixelPoint& p : object.contour.points) put(canvas, p.row, p.col, kContour);
        for (const ConvexityDefect& d : object.defects)
            draw_disc(canvas, object.contour[d.farthest].row, object.contour[d.farthest].col, 2, kCutoff);
    }
    for (const StemDetection& stem : stems) {
        // Positions stay inside the inflated bounding box; clamp anyway so
        // the marker is always visible.
        const int r = std::clamp(static_cast<int>(std::lround(stem.position.row)), 0, canvas.height() - 1);
        const int c = std::clamp(static_cast<int>(std::lround(stem.position.col)), 0, canvas.width() - 1);
        draw_cross(canvas, r, c, 4, kStem);
    }

    save_image(canvas, path);
}

} // namespace stemdet
