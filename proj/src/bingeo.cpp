#include "stemdet/bingeo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace stemdet {

namespace {

// Row-major bit plane; rows padded to whole 64-bit words. Shifting in
// zeros matches the outside-is-background rule for dilation.
struct BitPlane {
    int width = 0, height = 0, words = 0;
    std::vector<std::uint64_t> data;

    BitPlane(int w, int h) : width(w), height(h), words((w + 63) / 64), data(static_cast<std::size_t>(words) * h, 0) {}

    std::uint64_t* row(int r) { return data.data() + static_cast<std::size_t>(r) * words; }
    const std::uint64_t* row(int r) const { return data.data() + static_cast<std::size_t>(r) * words; }

    void mask_tail() {
        const int rem = width % 64;
        if (rem == 0) return;
        const std::uint64_t keep = (~std::uint64_t{0}) >> (64 - rem);
        for (int r = 0; r < height; ++r) row(r)[words - 1] &= keep;
    }
};

BitPlane to_bits(const BinaryMask& mask) {
    BitPlane bits(mask.width(), mask.height());
    for (int r = 0; r < mask.height(); ++r) {
        std::uint64_t* row = bits.row(r);
        for (int c = 0; c < mask.width(); ++c)
            if (mask.at(r, c)) row[c >> 6] |= std::uint64_t{1} << (c & 63);
    }
    return bits;
}

BinaryMask from_bits(const BitPlane& bits) {
    BinaryMask mask(bits.width, bits.height);
    for (int r = 0; r < bits.height; ++r) {
        const std::uint64_t* row = bits.row(r);
        for (int c = 0; c < bits.width; ++c)
            if (row[c >> 6] >> (c & 63) & 1) mask.set(r, c, true);
    }
    return mask;
}

void shift_row_left(const std::uint64_t* src, std::uint64_t* dst, int words, int s) {
    // "left" in image coordinates: column c takes the bit of column c + s.
    const int word_shift = s >> 6, bit_shift = s & 63;
    for (int w = 0; w < words; ++w) {
        std::uint64_t v = 0;
        if (w + word_shift < words) v = src[w + word_shift] >> bit_shift;
        if (bit_shift && w + word_shift + 1 < words) v |= src[w + word_shift + 1] << (64 - bit_shift);
        dst[w] = v;
    }
}

void shift_row_right(const std::uint64_t* src, std::uint64_t* dst, int words, int s) {
    const int word_shift = s >> 6, bit_shift = s & 63;
    for (int w = words - 1; w >= 0; --w) {
        std::uint64_t v = 0;
        if (w - word_shift >= 0) v = src[w - word_shift] << bit_shift;
        if (bit_shift && w - word_shift - 1 >= 0) v |= src[w - word_shift - 1] >> (64 - bit_shift);
        dst[w] = v;
    }
}

// Dilation by the kernel, outside pixels background. The kernel rows are
// contiguous symmetric spans, so the sweep is one shifted-OR per row pair.
BitPlane dilate(const BitPlane& in, const std::vector<int>& row_half_span) {
    const int radius = static_cast<int>(row_half_span.size()) - 1;
    BitPlane out(in.width, in.height);
    std::vector<std::uint64_t> hrow(in.words), tmp(in.words);
    for (int r = 0; r < in.height; ++r) {
        std::uint64_t* dst = out.row(r);
        for (int dy = -radius; dy <= radius; ++dy) {
            const int src_r = r + dy;
            if (src_r < 0 || src_r >= in.height) continue;
            const int w = row_half_span[std::abs(dy)];
            if (w < 0) continue; // empty kernel row (cannot happen for ellipses)
            const std::uint64_t* src = in.row(src_r);
            std::copy(src, src + in.words, hrow.data());
            for (int s = 1; s <= w; ++s) {
                shift_row_left(src, tmp.data(), in.words, s);
                for (int k = 0; k < in.words; ++k) hrow[k] |= tmp[k];
                shift_row_right(src, tmp.data(), in.words, s);
                for (int k = 0; k < in.words; ++k) hrow[k] |= tmp[k];
            }
            for (int k = 0; k < in.words; ++k) dst[k] |= hrow[k];
        }
    }
    out.mask_tail();
    return out;
}

} // namespace

StructuringElement make_ellipse_kernel(int m) {
    if (m < 1 || m % 2 == 0)
        throw std::invalid_argument("kernel size must be a positive odd integer");
    StructuringElement se;
    se.size = m;
    se.stencil.assign(static_cast<std::size_t>(m) * m, 0);
    const int h = (m - 1) / 2;
    if (h == 0) {
        se.stencil[0] = 1;
        return se;
    }
    const std::int64_t a2 = static_cast<std::int64_t>(h) * h;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const std::int64_t dr = r - h, dc = c - h;
            if (dr * dr + dc * dc <= a2) se.stencil[static_cast<std::size_t>(r) * m + c] = 1;
        }
    }
    return se;
}

BinaryMask close(const BinaryMask& mask, const StructuringElement& kernel) {
    const int radius = kernel.radius();
    if (radius == 0) return mask;

    std::vector<int> half_span(radius + 1, -1);
    for (int dy = 0; dy <= radius; ++dy) {
        int w = -1;
        for (int dx = 0; dx <= radius; ++dx)
            if (kernel.at(radius + dy, radius + dx)) w = dx;
        half_span[dy] = w;
    }

    // Erosion that ignores outside pixels is the complement of a dilation
    // of the complement, so closing is two dilations around a flip.
    BitPlane bits = to_bits(mask);
    BitPlane dilated = dilate(bits, half_span);
    for (auto& w : dilated.data) w = ~w;
    dilated.mask_tail();
    BitPlane eroded = dilate(dilated, half_span);
    for (auto& w : eroded.data) w = ~w;
    eroded.mask_tail();
    return from_bits(eroded);
}

std::vector<Component> connected_components(const BinaryMask& mask, int min_area) {
    const int w = mask.width(), h = mask.height();
    std::vector<std::int32_t> labels(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::int32_t> parent;
    parent.reserve(1024);

    auto find = [&parent](std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&parent, &find](std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    // First pass: 8-connectivity, look at W, NW, N, NE.
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask.at(r, c)) continue;
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            std::int32_t lab = -1;
            auto consider = [&](int rr, int cc) {
                if (rr < 0 || cc < 0 || cc >= w) return;
                const std::int32_t n = labels[static_cast<std::size_t>(rr) * w + cc];
                if (n < 0) return;
                if (lab < 0) lab = n;
                else unite(lab, n);
            };
            consider(r, c - 1);
            consider(r - 1, c - 1);
            consider(r - 1, c);
            consider(r - 1, c + 1);
            if (lab < 0) {
                lab = static_cast<std::int32_t>(parent.size());
                parent.push_back(lab);
            }
            labels[i] = lab;
        }
    }

    // Second pass: resolve labels and gather pixels in scan order.
    std::vector<std::int32_t> root_to_comp(parent.size(), -1);
    std::vector<Component> comps;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::int32_t lab = labels[static_cast<std::size_t>(r) * w + c];
            if (lab < 0) continue;
            const std::int32_t root = find(lab);
            std::int32_t ci = root_to_comp[root];
            if (ci < 0) {
                ci = static_cast<std::int32_t>(comps.size());
                root_to_comp[root] = ci;
                comps.push_back(Component{});
                comps[ci].min_row = comps[ci].max_row = r;
                comps[ci].min_col = comps[ci].max_col = c;
            }
            Component& comp = comps[ci];
            comp.pixels.push_back({r, c});
            comp.min_row = std::min(comp.min_row, r);
            comp.max_row = std::max(comp.max_row, r);
            comp.min_col = std::min(comp.min_col, c);
            comp.max_col = std::max(comp.max_col, c);
        }
    }

    std::erase_if(comps, [min_area](const Component& c) {
        return static_cast<int>(c.pixels.size()) < min_area;
    });
    std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
        if (a.min_row != b.min_row) return a.min_row < b.min_row;
        if (a.min_col != b.min_col) return a.min_col < b.min_col;
        const PixelPoint pa = a.pixels.front(), pb = b.pixels.front();
        return pa.row != pb.row ? pa.row < pb.row : pa.col < pb.col;
    });
    for (std::size_t i = 0; i < comps.size(); ++i) {
        comps[i].label = static_cast<int>(i);
        comps[i].area = static_cast<int>(comps[i].pixels.size());
    }
    return comps;
}

namespace {

// Moore neighborhood in visually-clockwise order, which traces the outer
// boundary counter-clockwise in the (x = col, y = row) plane.
constexpr int kDirRow[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDirCol[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_index(PixelPoint from, PixelPoint to) {
    for (int d = 0; d < 8; ++d)
        if (from.row + kDirRow[d] == to.row && from.col + kDirCol[d] == to.col) return d;
    throw std::logic_error("points not adjacent");
}

} // namespace

Contour trace_contour(const Component& component, int mask_height, int mask_width) {
    if (component.pixels.empty()) throw std::invalid_argument("empty component");
    (void)mask_height;
    (void)mask_width;

    // Local occupancy bitmap over the bounding box.
    const int bh = component.max_row - component.min_row + 1;
    const int bw = component.max_col - component.min_col + 1;
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(bh) * bw, 0);
    for (const PixelPoint& p : component.pixels)
        occ[static_cast<std::size_t>(p.row - component.min_row) * bw + (p.col - component.min_col)] = 1;
    auto inside = [&](int r, int c) {
        const int lr = r - component.min_row, lc = c - component.min_col;
        return lr >= 0 && lr < bh && lc >= 0 && lc < bw && occ[static_cast<std::size_t>(lr) * bw + lc];
    };

    // Start at the top-left-most pixel; its west neighbor is background.
    const PixelPoint start = component.pixels.front(); // scan order: min row, then min col
    PixelPoint cur = start;
    PixelPoint backtrack{start.row, start.col - 1};

    std::vector<PixelPoint> walk;
    walk.push_back(start);

    // The walk is a deterministic cycle through (pixel, backtrack) states;
    // the initial state may be a lead-in, so the loop closes on the first
    // recurrence of the state after the first move.
    PixelPoint first_cur{}, first_backtrack{};
    bool have_first = false;
    const std::size_t max_steps = 8 * component.pixels.size() + 64;
    for (std::size_t step = 0; step < max_steps; ++step) {
        const int entry = direction_index(cur, backtrack);
        PixelPoint next{};
        int found = -1;
        for (int i = 1; i <= 8; ++i) {
            const int d = (entry + i) & 7;
            const PixelPoint q{cur.row + kDirRow[d], cur.col + kDirCol[d]};
            if (inside(q.row, q.col)) {
                next = q;
                found = (entry + i - 1) & 7;
                break;
            }
        }
        if (found < 0) break; // isolated pixel
        const PixelPoint next_backtrack{cur.row + kDirRow[found], cur.col + kDirCol[found]};
        if (have_first && next == first_cur && next_backtrack == first_backtrack)
            break; // boundary closed
        if (!have_first) {
            first_cur = next;
            first_backtrack = next_backtrack;
            have_first = true;
        }
        backtrack = next_backtrack;
        cur = next;
        walk.push_back(cur);
    }

    // Out-and-back passages over one-pixel-wide parts revisit pixels;
    // keep the first occurrence in trace order.
    Contour contour;
    contour.points.reserve(walk.size());
    std::unordered_set<std::int64_t> seen;
    seen.reserve(walk.size() * 2);
    for (const PixelPoint& p : walk) {
        const std::int64_t key = (static_cast<std::int64_t>(p.row) << 32) | static_cast<std::uint32_t>(p.col);
        if (seen.insert(key).second) contour.points.push_back(p);
    }
    return contour;
}

std::vector<int> convex_hull(const Contour& contour) {
    const int n = static_cast<int>(contour.size());
    if (n == 0) throw std::invalid_argument("empty contour");
    if (n <= 2) {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        if (n == 2 && contour[0] == contour[1]) all.pop_back();
        return all;
    }

    // Andrew monotone chain over the point set, strict turns only.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const PixelPoint pa = contour[a], pb = contour[b];
        return pa.col != pb.col ? pa.col < pb.col : pa.row < pb.row;
    });

    auto build = [&](auto begin, auto end) {
        std::vector<int> chain;
        for (auto it = begin; it != end; ++it) {
            while (chain.size() >= 2 &&
                   orient(contour[chain[chain.size() - 2]], contour[chain.back()], contour[*it]) <= 0)
                chain.pop_back();
            chain.push_back(*it);
        }
        return chain;
    };
    std::vector<int> lower = build(order.begin(), order.end());
    std::vector<int> upper = build(order.rbegin(), order.rend());

    lower.pop_back();
    upper.pop_back();
    lower.insert(lower.end(), upper.begin(), upper.end());
    if (lower.empty()) lower.push_back(order.front()); // all points coincide

    // Ascending contour order, which is the counter-clockwise cyclic order
    // for a counter-clockwise contour and independent of the trace start.
    std::sort(lower.begin(), lower.end());
    lower.erase(std::unique(lower.begin(), lower.end()), lower.end());
    return lower;
}

std::vector<ConvexityDefect> convexity_defects(const Contour& contour, const std::vector<int>& hull) {
    if (hull.empty()) throw std::invalid_argument("empty hull");
    const int n = static_cast<int>(contour.size());
    const int k = static_cast<int>(hull.size());
    std::vector<ConvexityDefect> defects;
    if (n < 3 || k < 2) return defects;

    for (int e = 0; e < k; ++e) {
        const int ia = hull[e];
        const int ib = hull[(e + 1) % k];
        const PixelPoint a = contour[ia], b = contour[ib];

        // Walk the open contour arc from a to b; the first point met wins ties.
        std::int64_t best_cross = -1;
        int best_idx = -1;
        for (int j = (ia + 1) % n; j != ib; j = (j + 1) % n) {
            const std::int64_t c = std::llabs(orient(a, b, contour[j]));
            if (c > best_cross) {
                best_cross = c;
                best_idx = j;
            }
        }
        if (best_idx < 0) continue; // no interior contour points on this edge

        const double len = std::sqrt(static_cast<double>(dist2(a, b)));
        ConvexityDefect d;
        d.hull_start = ia;
        d.hull_end = ib;
        d.farthest = best_idx;
        d.depth = len > 0.0 ? static_cast<double>(best_cross) / len : 0.0;
        defects.push_back(d);
    }
    return defects;
}

} // namespace stemdet
