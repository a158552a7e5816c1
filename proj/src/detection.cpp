#include "stemdet/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stemdet {

namespace {

// Leaf and stem geometry runs on a 2^-20 px integer grid in the local
// frame of each component. Exact integer arithmetic (plus round-half-even
// rational rounding, which commutes with the reflections of a 90-degree
// image rotation) makes detect_all exactly translation- and
// rotation-equivariant and independent of summation order.
constexpr std::int64_t kFix = 1 << 20;

using int128 = __int128;

std::int64_t div_round_even(int128 num, int128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    int128 q = num / den;
    int128 r = num % den;
    if (r < 0) {
        q -= 1;
        r += den;
    }
    const int128 twice = 2 * r;
    if (twice > den) return static_cast<std::int64_t>(q + 1);
    if (twice < den) return static_cast<std::int64_t>(q);
    return static_cast<std::int64_t>((q % 2 == 0) ? q : q + 1);
}

struct FixPoint {
    std::int64_t row = 0, col = 0; // 2^-20 px units, component-local frame
};

Point to_global(FixPoint p, int origin_row, int origin_col) {
    // Exact: both coordinates are dyadic with 20 fractional bits.
    return Point{static_cast<double>(p.row + origin_row * kFix) / kFix,
                 static_cast<double>(p.col + origin_col * kFix) / kFix};
}

FixPoint to_local(Point p, int origin_row, int origin_col) {
    // Inverse of to_global; exact for values produced by it.
    return FixPoint{std::llround((p.row - origin_row) * kFix),
                    std::llround((p.col - origin_col) * kFix)};
}

double i128_to_double(int128 v) {
    return static_cast<double>(v);
}

// Intersection of the infinite lines a + t*(b - a), in fixed-point units.
std::optional<FixPoint> intersect_fix(FixPoint a1, FixPoint b1, FixPoint a2, FixPoint b2,
                                      double min_angle_deg) {
    const std::int64_t d1r = b1.row - a1.row, d1c = b1.col - a1.col;
    const std::int64_t d2r = b2.row - a2.row, d2c = b2.col - a2.col;
    const int128 cross = static_cast<int128>(d1c) * d2r - static_cast<int128>(d1r) * d2c;
    const int128 dot = static_cast<int128>(d1c) * d2c + static_cast<int128>(d1r) * d2r;
    const double angle_deg =
        std::atan2(std::fabs(i128_to_double(cross)), std::fabs(i128_to_double(dot))) * (180.0 / M_PI);
    if (angle_deg < min_angle_deg) return std::nullopt;

    const std::int64_t wr = a2.row - a1.row, wc = a2.col - a1.col;
    const int128 num = static_cast<int128>(wc) * d2r - static_cast<int128>(wr) * d2c;
    FixPoint out;
    out.row = div_round_even(static_cast<int128>(a1.row) * cross + num * d1r, cross);
    out.col = div_round_even(static_cast<int128>(a1.col) * cross + num * d1c, cross);
    return out;
}

} // namespace

void DetectorConfig::validate() const {
    if (!(min_defect_depth > 0.0)) throw std::invalid_argument("min_defect_depth must be positive");
    if (min_leaves < 2) throw std::invalid_argument("min_leaves must be at least 2");
    if (!(box_inflation >= 1.0)) throw std::invalid_argument("box_inflation must be >= 1");
    if (!(min_intersect_angle_deg > 0.0) || !(min_intersect_angle_deg < 90.0))
        throw std::invalid_argument("min_intersect_angle_deg must be in (0, 90)");
}

PlantObject make_plant_object(Component component, int mask_height, int mask_width,
                              double min_defect_depth) {
    PlantObject object;
    object.contour = trace_contour(component, mask_height, mask_width);
    object.hull = convex_hull(object.contour);
    std::vector<ConvexityDefect> defects = convexity_defects(object.contour, object.hull);
    std::erase_if(defects, [min_defect_depth](const ConvexityDefect& d) {
        return d.depth < min_defect_depth;
    });
    std::sort(defects.begin(), defects.end(),
              [](const ConvexityDefect& a, const ConvexityDefect& b) { return a.farthest < b.farthest; });
    object.defects = std::move(defects);
    object.component = std::move(component);
    return object;
}

std::vector<Leaf> extract_leaves(const PlantObject& object) {
    std::vector<Leaf> leaves;
    const int k = static_cast<int>(object.defects.size());
    if (k < 2) return leaves;

    const Contour& contour = object.contour;
    const int n = static_cast<int>(contour.size());
    const int origin_row = object.component.min_row;
    const int origin_col = object.component.min_col;
    const std::int64_t local_max_row = object.component.max_row - origin_row;
    const std::int64_t local_max_col = object.component.max_col - origin_col;

    for (int i = 0; i < k; ++i) {
        const int begin = object.defects[i].farthest;
        const int end = object.defects[(i + 1) % k].farthest;

        // Shoelace area and centroid of the contour span closed by the
        // cut-off segment, in exact local integers.
        std::int64_t area2 = 0, sum_row = 0, sum_col = 0;
        for (int j = begin; ; j = (j + 1) % n) {
            const int jn = (j == end) ? begin : (j + 1) % n;
            const std::int64_t xr = contour[j].row - origin_row;
            const std::int64_t xc = contour[j].col - origin_col;
            const std::int64_t yr = contour[jn].row - origin_row;
            const std::int64_t yc = contour[jn].col - origin_col;
            const std::int64_t w = xc * yr - xr * yc;
            area2 += w;
            sum_row += (xr + yr) * w;
            sum_col += (xc + yc) * w;
            if (j == end) break;
        }
        if (area2 == 0) continue; // degenerate span

        Leaf leaf;
        leaf.span_begin = begin;
        leaf.span_end = end;
        leaf.cutoff_a = Point{static_cast<double>(contour[begin].row),
                              static_cast<double>(contour[begin].col)};
        leaf.cutoff_b = Point{static_cast<double>(contour[end].row),
                              static_cast<double>(contour[end].col)};

        FixPoint root;
        root.row = (static_cast<std::int64_t>(contour[begin].row - origin_row) +
                    (contour[end].row - origin_row)) * (kFix / 2);
        root.col = (static_cast<std::int64_t>(contour[begin].col - origin_col) +
                    (contour[end].col - origin_col)) * (kFix / 2);

        FixPoint center;
        center.row = div_round_even(static_cast<int128>(sum_row) * kFix, static_cast<int128>(3) * area2);
        center.col = div_round_even(static_cast<int128>(sum_col) * kFix, static_cast<int128>(3) * area2);

        // Degenerate leaves: center at the root or outside the box.
        const std::int64_t dr = center.row - root.row, dc = center.col - root.col;
        const int128 d2 = static_cast<int128>(dr) * dr + static_cast<int128>(dc) * dc;
        const int128 min_d2 = static_cast<int128>(kFix / 2) * (kFix / 2);
        if (d2 < min_d2) continue;
        if (center.row < 0 || center.row > local_max_row * kFix) continue;
        if (center.col < 0 || center.col > local_max_col * kFix) continue;

        leaf.root = to_global(root, origin_row, origin_col);
        leaf.center = to_global(center, origin_row, origin_col);
        leaves.push_back(leaf);
    }
    return leaves;
}

std::optional<Point> intersect_directions(const Line& l1, const Line& l2, double min_angle_deg) {
    return intersect_lines(l1, l2, min_angle_deg);
}

Point centroid(const Component& component) {
    if (component.pixels.empty()) throw std::invalid_argument("empty component");
    std::int64_t sum_row = 0, sum_col = 0;
    for (const PixelPoint& p : component.pixels) {
        sum_row += p.row;
        sum_col += p.col;
    }
    const double n = static_cast<double>(component.pixels.size());
    return Point{static_cast<double>(sum_row) / n, static_cast<double>(sum_col) / n};
}

StemDetection estimate_stem(const PlantObject& object, const std::vector<Leaf>& leaves,
                            const DetectorConfig& config) {
    const Component& comp = object.component;
    const int origin_row = comp.min_row, origin_col = comp.min_col;

    StemDetection det;
    det.num_leaves = static_cast<int>(leaves.size());
    det.object_ref = comp.label;

    if (!config.centroid_only && det.num_leaves >= config.min_leaves) {
        std::int64_t sum_row = 0, sum_col = 0;
        int count = 0;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            const FixPoint ri = to_local(leaves[i].root, origin_row, origin_col);
            const FixPoint ci = to_local(leaves[i].center, origin_row, origin_col);
            for (std::size_t j = i + 1; j < leaves.size(); ++j) {
                const FixPoint rj = to_local(leaves[j].root, origin_row, origin_col);
                const FixPoint cj = to_local(leaves[j].center, origin_row, origin_col);
                const auto p = intersect_fix(ri, ci, rj, cj, config.min_intersect_angle_deg);
                if (!p) continue;
                sum_row += p->row;
                sum_col += p->col;
                ++count;
            }
        }
        if (count > 0) {
            FixPoint mean;
            mean.row = div_round_even(sum_row, count);
            mean.col = div_round_even(sum_col, count);

            // Feasibility: the regressed point must fall inside the
            // bounding box inflated by box_inflation about its center.
            const std::int64_t center_row = static_cast<std::int64_t>(comp.max_row - comp.min_row) * (kFix / 2);
            const std::int64_t center_col = static_cast<std::int64_t>(comp.max_col - comp.min_col) * (kFix / 2);
            const double half_row = config.box_inflation * static_cast<double>(center_row);
            const double half_col = config.box_inflation * static_cast<double>(center_col);
            if (std::fabs(static_cast<double>(mean.row - center_row)) <= half_row &&
                std::fabs(static_cast<double>(mean.col - center_col)) <= half_col) {
                det.position = to_global(mean, origin_row, origin_col);
                det.method = StemMethod::LeafIntersection;
                return det;
            }
        }
    }

    // Fallback: center of mass of the mask object.
    std::int64_t sum_row = 0, sum_col = 0;
    for (const PixelPoint& p : comp.pixels) {
        sum_row += p.row - origin_row;
        sum_col += p.col - origin_col;
    }
    FixPoint c;
    c.row = div_round_even(static_cast<int128>(sum_row) * kFix, static_cast<int128>(comp.area));
    c.col = div_round_even(static_cast<int128>(sum_col) * kFix, static_cast<int128>(comp.area));
    det.position = to_global(c, origin_row, origin_col);
    det.method = StemMethod::CentroidFallback;
    return det;
}

std::vector<PlantAnalysis> analyze_mask(const BinaryMask& mask, const DetectorConfig& config,
                                        int kernel_size, int min_area) {
    config.validate();
    const BinaryMask closed = close(mask, make_ellipse_kernel(kernel_size));
    std::vector<Component> components = connected_components(closed, min_area);

    std::vector<PlantAnalysis> out;
    out.reserve(components.size());
    for (Component& comp : components) {
        PlantAnalysis a;
        a.object = make_plant_object(std::move(comp), mask.height(), mask.width(),
                                     config.min_defect_depth);
        a.leaves = extract_leaves(a.object);
        a.stem = estimate_stem(a.object, a.leaves, config);
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<StemDetection> detect_all(const BinaryMask& mask, const DetectorConfig& config,
                                      int kernel_size, int min_area) {
    std::vector<StemDetection> stems;
    for (const PlantAnalysis& a : analyze_mask(mask, config, kernel_size, min_area))
        stems.push_back(a.stem);
    return stems;
}

} // namespace stemdet
