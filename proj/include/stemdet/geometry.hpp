#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

namespace stemdet {

// Integer pixel coordinate. (row, col), origin at the top-left pixel,
// rows grow downward. Every module shares this convention.
struct PixelPoint {
    int row = 0;
    int col = 0;

    friend bool operator==(PixelPoint a, PixelPoint b) { return a.row == b.row && a.col == b.col; }
    friend bool operator!=(PixelPoint a, PixelPoint b) { return !(a == b); }
};

// Sub-pixel coordinate for geometry results, same (row, col) convention.
struct Point {
    double row = 0.0;
    double col = 0.0;
};

// Orientation of the triple (o, a, b): positive when o->a->b turns
// counter-clockwise in the (x = col, y = row) plane. Exact for pixel input.
inline std::int64_t orient(PixelPoint o, PixelPoint a, PixelPoint b) {
    const std::int64_t acol = a.col - o.col, arow = a.row - o.row;
    const std::int64_t bcol = b.col - o.col, brow = b.row - o.row;
    return acol * brow - arow * bcol;
}

inline std::int64_t dist2(PixelPoint a, PixelPoint b) {
    const std::int64_t dr = a.row - b.row, dc = a.col - b.col;
    return dr * dr + dc * dc;
}

inline double distance(Point a, Point b) {
    return std::hypot(a.row - b.row, a.col - b.col);
}

// Infinite line through two distinct points.
struct Line {
    Point a;
    Point b;
};

// Intersection of two infinite lines, or nothing when the angle between
// their directions (folded into [0, 90] degrees) is below min_angle_deg.
// The guard also absorbs the exactly-parallel case.
inline std::optional<Point> intersect_lines(const Line& l1, const Line& l2, double min_angle_deg) {
    const double d1r = l1.b.row - l1.a.row, d1c = l1.b.col - l1.a.col;
    const double d2r = l2.b.row - l2.a.row, d2c = l2.b.col - l2.a.col;
    const double cross = d1c * d2r - d1r * d2c;
    const double dot = d1c * d2c + d1r * d2r;
    const double angle_deg = std::atan2(std::fabs(cross), std::fabs(dot)) * (180.0 / M_PI);
    if (angle_deg < min_angle_deg) return std::nullopt;
    const double wr = l2.a.row - l1.a.row, wc = l2.a.col - l1.a.col;
    const double t = (wc * d2r - wr * d2c) / cross;
    return Point{l1.a.row + t * d1r, l1.a.col + t * d1c};
}

} // namespace stemdet
