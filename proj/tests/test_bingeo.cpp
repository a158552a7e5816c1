#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oracles.hpp"
#include "stemdet/bingeo.hpp"
#include "testutil.hpp"

using namespace stemdet;
using testutil::mask_from_strings;

namespace {

Component largest_component(const BinaryMask& mask) {
    auto comps = connected_components(mask, 1);
    REQUIRE_FALSE(comps.empty());
    return *std::max_element(comps.begin(), comps.end(),
                             [](const Component& a, const Component& b) { return a.area < b.area; });
}

// Filled polygon rasterization for hand-built star shapes.
BinaryMask fill_polygon(const std::vector<Point>& poly, int width, int height) {
    BinaryMask mask(width, height);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            bool inside = false;
            for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
                const Point &a = poly[i], &b = poly[j];
                if ((a.row > r) != (b.row > r)) {
                    const double x = (b.col - a.col) * (r - a.row) / (b.row - a.row) + a.col;
                    if (c < x) inside = !inside;
                }
            }
            if (inside) mask.set(r, c, true);
        }
    }
    return mask;
}

} // namespace

TEST_CASE("make_ellipse_kernel matches the stencil inequality") {
    const StructuringElement k1 = make_ellipse_kernel(1);
    CHECK(k1.size == 1);
    CHECK(k1.at(0, 0));

    // m=3: evaluating the inequality at all 9 cells leaves the cross.
    const StructuringElement k3 = make_ellipse_kernel(3);
    int trues = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) trues += k3.at(r, c) ? 1 : 0;
    CHECK(trues == 5);
    CHECK(k3.at(1, 1));
    CHECK(k3.at(0, 1));
    CHECK(k3.at(1, 0));
    CHECK_FALSE(k3.at(0, 0));
    CHECK_FALSE(k3.at(2, 2));

    CHECK_THROWS_AS(make_ellipse_kernel(2), std::invalid_argument);
    CHECK_THROWS_AS(make_ellipse_kernel(0), std::invalid_argument);
    CHECK_THROWS_AS(make_ellipse_kernel(-3), std::invalid_argument);
}

TEST_CASE("ellipse kernels are centered and 180-degree symmetric") {
    for (int m : {1, 3, 5, 9, 15}) {
        const StructuringElement k = make_ellipse_kernel(m);
        CHECK(k.at(k.radius(), k.radius()));
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) CHECK(k.at(r, c) == k.at(m - 1 - r, m - 1 - c));
    }
}

TEST_CASE("close keeps empty and full masks fixed") {
    for (int m : {3, 9}) {
        const StructuringElement k = make_ellipse_kernel(m);
        const BinaryMask empty(17, 13);
        CHECK(close(empty, k) == empty);

        BinaryMask full(17, 13);
        for (int r = 0; r < 13; ++r)
            for (int c = 0; c < 17; ++c) full.set(r, c, true);
        CHECK(close(full, k) == full);
        CHECK(close(full, k) == oracles::naive_close(full, k));
    }
}

TEST_CASE("close joins blocks separated by a one-pixel gap") {
    BinaryMask mask(16, 8);
    for (int r = 1; r < 6; ++r)
        for (int c = 1; c < 6; ++c) mask.set(r, c, true);
    for (int r = 1; r < 6; ++r)
        for (int c = 7; c < 12; ++c) mask.set(r, c, true);
    CHECK(connected_components(mask, 1).size() == 2);

    const BinaryMask closed = close(mask, make_ellipse_kernel(3));
    CHECK(closed == oracles::naive_close(mask, make_ellipse_kernel(3)));
    CHECK(connected_components(closed, 1).size() == 1);
}

TEST_CASE("close equals the naive per-pixel oracle on random masks") {
    testutil::Rng rng(321);
    for (int trial = 0; trial < 30; ++trial) {
        const BinaryMask mask = trial % 2
                                    ? testutil::random_noise_mask(rng, 33, 26, rng.uniform(0.05, 0.5))
                                    : testutil::random_blob_mask(rng, 48, 40, 1, 4);
        for (int m : {1, 3, 5}) {
            const StructuringElement k = make_ellipse_kernel(m);
            CHECK(close(mask, k) == oracles::naive_close(mask, k));
        }
    }
}

TEST_CASE("closing laws: extensive, increasing, idempotent") {
    testutil::Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const BinaryMask x = testutil::random_noise_mask(rng, 28, 28, rng.uniform(0.1, 0.45));
        BinaryMask y = x;
        for (int extra = 0; extra < 30; ++extra)
            y.set(rng.uniform_int(0, 27), rng.uniform_int(0, 27), true);

        for (int m : {3, 5}) {
            const StructuringElement k = make_ellipse_kernel(m);
            const BinaryMask cx = close(x, k);
            CHECK(testutil::subset_of(x, cx));           // extensive
            CHECK(close(cx, k) == cx);                   // idempotent
            CHECK(testutil::subset_of(cx, close(y, k))); // increasing
        }
    }
}

TEST_CASE("connected_components on empty, diagonal and filtered inputs") {
    CHECK(connected_components(BinaryMask(5, 5), 1).empty());

    const BinaryMask diag = mask_from_strings({
        "#....",
        ".#...",
        ".....",
    });
    const auto comps = connected_components(diag, 1);
    REQUIRE(comps.size() == 1); // 8-connectivity joins the diagonal pair
    CHECK(comps[0].area == 2);

    const BinaryMask blocks = mask_from_strings({
        "###..##",
        "###..#.",
        "###....",
    });
    const auto filtered = connected_components(blocks, 5);
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].area == 9);
    CHECK(filtered[0].min_row == 0);
    CHECK(filtered[0].min_col == 0);
    CHECK(filtered[0].max_row == 2);
    CHECK(filtered[0].max_col == 2);
}

TEST_CASE("connected_components partitions exactly like a flood-fill oracle") {
    testutil::Rng rng(1234);
    for (int trial = 0; trial < 25; ++trial) {
        const BinaryMask mask = testutil::random_noise_mask(rng, 40, 31, rng.uniform(0.2, 0.6));
        const auto comps = connected_components(mask, 1);
        const auto labels = oracles::flood_labels(mask);

        std::size_t covered = 0;
        std::set<int> used_oracle_labels;
        for (const Component& comp : comps) {
            REQUIRE_FALSE(comp.pixels.empty());
            const int lab = labels[static_cast<std::size_t>(comp.pixels[0].row) * mask.width() +
                                   comp.pixels[0].col];
            CHECK(lab >= 0);
            CHECK(used_oracle_labels.insert(lab).second); // one oracle blob per component
            for (const PixelPoint& p : comp.pixels) {
                CHECK(labels[static_cast<std::size_t>(p.row) * mask.width() + p.col] == lab);
            }
            covered += comp.pixels.size();
            CHECK(comp.area == static_cast<int>(comp.pixels.size()));
        }
        CHECK(covered == mask.count());

        for (std::size_t i = 0; i < comps.size(); ++i) CHECK(comps[i].label == static_cast<int>(i));
        for (std::size_t i = 1; i < comps.size(); ++i) {
            const bool ordered = comps[i - 1].min_row < comps[i].min_row ||
                                 (comps[i - 1].min_row == comps[i].min_row &&
                                  comps[i - 1].min_col <= comps[i].min_col);
            CHECK(ordered);
        }
    }
}

TEST_CASE("trace_contour on a single pixel, a square and a line") {
    const BinaryMask dot = mask_from_strings({"#"});
    const Contour cdot = trace_contour(connected_components(dot, 1)[0], 1, 1);
    REQUIRE(cdot.size() == 1);
    CHECK(cdot[0] == PixelPoint{0, 0});

    const BinaryMask square = mask_from_strings({
        "###",
        "###",
        "###",
    });
    const Contour csq = trace_contour(connected_components(square, 1)[0], 3, 3);
    REQUIRE(csq.size() == 8); // all but the center
    const std::vector<PixelPoint> expected{{0, 0}, {0, 1}, {0, 2}, {1, 2},
                                           {2, 2}, {2, 1}, {2, 0}, {1, 0}};
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(csq[i] == expected[i]);

    const BinaryMask line = mask_from_strings({"#####"});
    const Contour cline = trace_contour(connected_components(line, 1)[0], 1, 5);
    REQUIRE(cline.size() == 5); // out-and-back collapsed to first passage
    for (int i = 0; i < 5; ++i) CHECK(cline[i] == PixelPoint{0, i});
}

TEST_CASE("contour points are boundary pixels and 8-adjacent on blobs") {
    testutil::Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        const BinaryMask mask = testutil::random_blob_mask(rng, 64, 64, 1, 1, 6.0, 14.0);
        if (mask.count() == 0) continue;
        const Component comp = largest_component(mask);
        const Contour contour = trace_contour(comp, 64, 64);

        std::set<std::pair<int, int>> in_comp;
        for (const PixelPoint& p : comp.pixels) in_comp.insert({p.row, p.col});

        for (std::size_t i = 0; i < contour.size(); ++i) {
            const PixelPoint p = contour[i];
            CHECK(in_comp.count({p.row, p.col}) == 1);
            bool boundary = false;
            const int nbr[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
            for (const auto& d : nbr) {
                const int rr = p.row + d[0], cc = p.col + d[1];
                if (rr < 0 || rr >= 64 || cc < 0 || cc >= 64 || !in_comp.count({rr, cc}))
                    boundary = true;
            }
            CHECK(boundary);

            const PixelPoint q = contour[(i + 1) % contour.size()];
            CHECK(std::max(std::abs(p.row - q.row), std::abs(p.col - q.col)) <= 1);
        }
    }
}

TEST_CASE("convex_hull of a square contour is its four corners") {
    const BinaryMask square = mask_from_strings({
        "####",
        "####",
        "####",
        "####",
    });
    const Contour contour = trace_contour(connected_components(square, 1)[0], 4, 4);
    const std::vector<int> hull = convex_hull(contour);
    REQUIRE(hull.size() == 4);
    std::set<std::pair<int, int>> corners;
    for (int idx : hull) corners.insert({contour[idx].row, contour[idx].col});
    CHECK(corners == std::set<std::pair<int, int>>{{0, 0}, {0, 3}, {3, 3}, {3, 0}});
}

TEST_CASE("convex_hull excludes collinear edge midpoints") {
    Contour contour;
    contour.points = {{0, 0}, {0, 2}, {0, 4}, {4, 4}, {4, 0}}; // midpoint of the top edge at index 1
    const std::vector<int> hull = convex_hull(contour);
    CHECK(hull == std::vector<int>{0, 2, 3, 4});
}

TEST_CASE("convex_hull handles degenerate contours") {
    Contour one;
    one.points = {{3, 7}};
    CHECK(convex_hull(one) == std::vector<int>{0});

    Contour two;
    two.points = {{3, 7}, {5, 2}};
    CHECK(convex_hull(two) == std::vector<int>{0, 1});

    const BinaryMask line = mask_from_strings({"#####"});
    const Contour cline = trace_contour(connected_components(line, 1)[0], 1, 5);
    CHECK(convex_hull(cline) == std::vector<int>{0, 4});
}

TEST_CASE("convex_hull equals the half-plane oracle on random blobs") {
    testutil::Rng rng(808);
    for (int trial = 0; trial < 30; ++trial) {
        const BinaryMask mask = testutil::random_blob_mask(rng, 72, 72, 1, 4, 3.0, 16.0);
        if (mask.count() == 0) continue;
        const Contour contour = trace_contour(largest_component(mask), 72, 72);
        CHECK(convex_hull(contour) == oracles::hull_halfplane(contour));
    }
}

TEST_CASE("convex_hull output is convex and contains every contour point") {
    testutil::Rng rng(909);
    for (int trial = 0; trial < 15; ++trial) {
        const BinaryMask mask = testutil::random_blob_mask(rng, 64, 64, 2, 4);
        if (mask.count() == 0) continue;
        const Contour contour = trace_contour(largest_component(mask), 64, 64);
        const std::vector<int> hull = convex_hull(contour);
        if (hull.size() < 3) continue;

        const int k = static_cast<int>(hull.size());
        for (int i = 0; i < k; ++i) {
            const PixelPoint a = contour[hull[i]];
            const PixelPoint b = contour[hull[(i + 1) % k]];
            const PixelPoint c = contour[hull[(i + 2) % k]];
            CHECK(orient(a, b, c) > 0); // strict left turns only
        }
        for (int i = 0; i < k; ++i) {
            const PixelPoint a = contour[hull[i]];
            const PixelPoint b = contour[hull[(i + 1) % k]];
            for (std::size_t j = 0; j < contour.size(); ++j)
                CHECK(orient(a, b, contour[j]) >= 0); // half-plane containment
        }
    }
}

TEST_CASE("convexity_defects of a convex square have zero depth") {
    const BinaryMask square = mask_from_strings({
        "#####",
        "#####",
        "#####",
        "#####",
        "#####",
    });
    const Contour contour = trace_contour(connected_components(square, 1)[0], 5, 5);
    const auto defects = convexity_defects(contour, convex_hull(contour));
    for (const ConvexityDefect& d : defects) CHECK(d.depth == doctest::Approx(0.0));
}

TEST_CASE("convexity_defects finds the four notches of a plus sign") {
    // Arms of length 10, width 4, on a 4x4 core.
    BinaryMask mask(36, 36);
    const int lo = 16, hi = 19; // core rows/cols [16, 19]
    for (int r = lo; r <= hi; ++r)
        for (int c = lo - 10; c <= hi + 10; ++c) mask.set(r, c, true);
    for (int c = lo; c <= hi; ++c)
        for (int r = lo - 10; r <= hi + 10; ++r) mask.set(r, c, true);

    const Contour contour = trace_contour(connected_components(mask, 1)[0], 36, 36);
    const std::vector<int> hull = convex_hull(contour);
    auto defects = convexity_defects(contour, hull);

    const auto oracle = oracles::defects_scan(contour, hull);
    REQUIRE(defects.size() == oracle.size());
    for (std::size_t i = 0; i < defects.size(); ++i) {
        CHECK(defects[i].hull_start == oracle[i].hull_start);
        CHECK(defects[i].hull_end == oracle[i].hull_end);
        CHECK(defects[i].farthest == oracle[i].farthest);
        CHECK(defects[i].depth == doctest::Approx(oracle[i].depth).epsilon(1e-12));
    }

    std::erase_if(defects, [](const ConvexityDefect& d) { return d.depth < 5.0; });
    REQUIRE(defects.size() == 4);
    // One defect per re-entrant corner of the core. The empty corner cell
    // itself has two equidistant foreground neighbors, so the farthest
    // point sits within one diagonal step of the ideal corner.
    const std::vector<Point> corners{{lo - 1.0, lo - 1.0}, {lo - 1.0, hi + 1.0},
                                     {hi + 1.0, lo - 1.0}, {hi + 1.0, hi + 1.0}};
    for (const Point& corner : corners) {
        int hits = 0;
        for (const ConvexityDefect& d : defects) {
            const Point p{static_cast<double>(contour[d.farthest].row),
                          static_cast<double>(contour[d.farthest].col)};
            if (distance(p, corner) <= 1.5) ++hits;
        }
        CHECK(hits == 1);
    }
}

TEST_CASE("convexity_defects finds the five inner vertices of a star") {
    std::vector<Point> poly;
    const double cr = 34, cc = 34, outer = 30, inner = 11;
    for (int i = 0; i < 5; ++i) {
        const double a0 = -M_PI / 2 + 2 * M_PI * i / 5;
        const double a1 = a0 + M_PI / 5;
        poly.push_back(Point{cr + outer * std::sin(a0), cc + outer * std::cos(a0)});
        poly.push_back(Point{cr + inner * std::sin(a1), cc + inner * std::cos(a1)});
    }
    const BinaryMask mask = fill_polygon(poly, 69, 69);

    const Contour contour = trace_contour(connected_components(mask, 1)[0], 69, 69);
    const std::vector<int> hull = convex_hull(contour);
    auto defects = convexity_defects(contour, hull);
    std::erase_if(defects, [](const ConvexityDefect& d) { return d.depth < 5.0; });
    CHECK(defects.size() == 5);

    auto oracle = oracles::defects_scan(contour, hull);
    std::erase_if(oracle, [](const ConvexityDefect& d) { return d.depth < 5.0; });
    REQUIRE(oracle.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(defects[i].farthest == oracle[i].farthest);
}

TEST_CASE("every defect's farthest point maximizes the edge distance") {
    testutil::Rng rng(414);
    for (int trial = 0; trial < 8; ++trial) {
        const BinaryMask mask = testutil::random_blob_mask(rng, 80, 80, 2, 5);
        if (mask.count() == 0) continue;
        const Contour contour = trace_contour(largest_component(mask), 80, 80);
        const std::vector<int> hull = convex_hull(contour);
        const auto defects = convexity_defects(contour, hull);
        const int n = static_cast<int>(contour.size());
        for (const ConvexityDefect& d : defects) {
            const std::int64_t best = std::llabs(
                orient(contour[d.hull_start], contour[d.hull_end], contour[d.farthest]));
            for (int j = (d.hull_start + 1) % n; j != d.hull_end; j = (j + 1) % n) {
                CHECK(std::llabs(orient(contour[d.hull_start], contour[d.hull_end], contour[j])) <=
                      best);
            }
        }
    }
}
