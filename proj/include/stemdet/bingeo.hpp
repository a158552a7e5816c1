#pragma once

#include <cstdint>
#include <vector>

#include "stemdet/raster.hpp"

namespace stemdet {

// Elliptic boolean stencil, odd size, inscribed in the m x m square.
// Center pixel is always set; the stencil is symmetric under 180 degree
// (and 90 degree) rotation.
struct StructuringElement {
    int size = 1;
    std::vector<std::uint8_t> stencil; // size x size, row-major

    bool at(int r, int c) const { return stencil[static_cast<std::size_t>(r) * size + c] != 0; }
    int radius() const { return (size - 1) / 2; }
};

// Stencil cell (r, c) is true iff ((r-h)/a)^2 + ((c-h)/a)^2 <= 1 with
// h = a = (m-1)/2. Throws for even or non-positive m.
StructuringElement make_ellipse_kernel(int m);

// Morphological closing (dilation then erosion with the same kernel).
// Outside pixels are background for dilation and do not constrain
// erosion, so closing is extensive, increasing and idempotent on the
// finite canvas.
BinaryMask close(const BinaryMask& mask, const StructuringElement& kernel);

// One 8-connected blob of true pixels.
struct Component {
    int label = 0;
    std::vector<PixelPoint> pixels; // row-major scan order
    int min_row = 0, min_col = 0, max_row = 0, max_col = 0;
    int area = 0;
};

// 8-connected labeling; components smaller than min_area are discarded;
// output sorted by bounding-box (min_row, min_col), then first pixel.
std::vector<Component> connected_components(const BinaryMask& mask, int min_area);

// Closed outer-boundary pixel chain, counter-clockwise in the
// (x = col, y = row) plane, starting at the top-left-most pixel.
struct Contour {
    std::vector<PixelPoint> points;

    std::size_t size() const { return points.size(); }
    PixelPoint operator[](std::size_t i) const { return points[i]; }
};

// Moore-neighbor boundary following. Pixels revisited by out-and-back
// passages over one-pixel-wide parts are collapsed to their first
// occurrence, so every boundary pixel appears exactly once, in trace
// order. Inner holes are ignored.
Contour trace_contour(const Component& component, int mask_height, int mask_width);

// Indices of convex-hull vertices into the contour, ascending (which is
// counter-clockwise for a counter-clockwise contour). Strict turns only:
// collinear boundary points are excluded. Degenerate inputs (<= 2
// distinct points) return those points.
std::vector<int> convex_hull(const Contour& contour);

// Deepest contour point between two cyclically consecutive hull vertices.
struct ConvexityDefect {
    int hull_start = 0; // contour index of hull vertex A
    int hull_end = 0;   // contour index of the next hull vertex B
    int farthest = 0;   // contour index of the deepest point strictly between
    double depth = 0.0; // perpendicular distance to line AB, pixels
};

// One defect per hull edge that has interior contour points; the farthest
// point maximizes the perpendicular distance to the edge, ties resolved
// toward the point met first when walking the contour from hull_start.
std::vector<ConvexityDefect> convexity_defects(const Contour& contour, const std::vector<int>& hull);

} // namespace stemdet
