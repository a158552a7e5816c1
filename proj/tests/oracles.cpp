#include "oracles.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>

namespace oracles {

using stemdet::BinaryMask;
using stemdet::Contour;
using stemdet::ConvexityDefect;
using stemdet::Histogram;
using stemdet::PixelPoint;
using stemdet::StructuringElement;

int brute_otsu(const Histogram& hist) {
    std::int64_t total = 0, moment = 0;
    for (int b = 0; b < 256; ++b) {
        total += static_cast<std::int64_t>(hist.bins[b]);
        moment += static_cast<std::int64_t>(b) * static_cast<std::int64_t>(hist.bins[b]);
    }
    int best = -1;
    double best_score = -1.0;
    for (int t = 0; t < 256; ++t) {
        std::int64_t n0 = 0, s0 = 0;
        for (int b = 0; b <= t; ++b) {
            n0 += static_cast<std::int64_t>(hist.bins[b]);
            s0 += static_cast<std::int64_t>(b) * static_cast<std::int64_t>(hist.bins[b]);
        }
        const std::int64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const std::int64_t d = s0 * total - moment * n0;
        const double score = static_cast<double>(d) * static_cast<double>(d) /
                             (static_cast<double>(n0) * static_cast<double>(n1));
        if (score > best_score) {
            best_score = score;
            best = t;
        }
    }
    return best;
}

int brute_triangle(const Histogram& hist) {
    int lo = -1, hi = -1, peak = -1;
    for (int b = 0; b < 256; ++b) {
        if (hist.bins[b] == 0) continue;
        if (lo < 0) lo = b;
        hi = b;
        if (peak < 0 || hist.bins[b] > hist.bins[peak]) peak = b;
    }
    const int tail = (peak - lo >= hi - peak) ? lo : hi;

    // Line through (peak, h_peak) and (tail, h_tail) as A*x + B*y + C = 0.
    const std::int64_t a = static_cast<std::int64_t>(hist.bins[tail]) -
                           static_cast<std::int64_t>(hist.bins[peak]);
    const std::int64_t b_coef = -static_cast<std::int64_t>(tail - peak);
    const std::int64_t c = -(a * peak + b_coef * static_cast<std::int64_t>(hist.bins[peak]));

    int best = -1;
    std::int64_t best_num = -1;
    for (int x = std::min(peak, tail); x <= std::max(peak, tail); ++x) {
        const std::int64_t num =
            std::llabs(a * x + b_coef * static_cast<std::int64_t>(hist.bins[x]) + c);
        if (num > best_num) {
            best_num = num;
            best = x;
        }
    }
    return best;
}

BinaryMask naive_dilate(const BinaryMask& mask, const StructuringElement& kernel) {
    const int rad = kernel.radius();
    BinaryMask out(mask.width(), mask.height());
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            bool hit = false;
            for (int dr = -rad; dr <= rad && !hit; ++dr)
                for (int dc = -rad; dc <= rad && !hit; ++dc)
                    if (kernel.at(rad + dr, rad + dc) && mask.in_bounds(r + dr, c + dc) &&
                        mask.at(r + dr, c + dc))
                        hit = true;
            out.set(r, c, hit);
        }
    }
    return out;
}

BinaryMask naive_erode(const BinaryMask& mask, const StructuringElement& kernel) {
    const int rad = kernel.radius();
    BinaryMask out(mask.width(), mask.height());
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            bool all = true;
            for (int dr = -rad; dr <= rad && all; ++dr)
                for (int dc = -rad; dc <= rad && all; ++dc)
                    if (kernel.at(rad + dr, rad + dc) && mask.in_bounds(r + dr, c + dc) &&
                        !mask.at(r + dr, c + dc))
                        all = false;
            out.set(r, c, all);
        }
    }
    return out;
}

BinaryMask naive_close(const BinaryMask& mask, const StructuringElement& kernel) {
    return naive_erode(naive_dilate(mask, kernel), kernel);
}

std::vector<int> flood_labels(const BinaryMask& mask) {
    const int w = mask.width(), h = mask.height();
    std::vector<int> labels(static_cast<std::size_t>(w) * h, -1);
    int next = 0;
    std::deque<PixelPoint> queue;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask.at(r, c) || labels[static_cast<std::size_t>(r) * w + c] >= 0) continue;
            const int lab = next++;
            labels[static_cast<std::size_t>(r) * w + c] = lab;
            queue.push_back({r, c});
            while (!queue.empty()) {
                const PixelPoint p = queue.front();
                queue.pop_front();
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int rr = p.row + dr, cc = p.col + dc;
                        if (!mask.in_bounds(rr, cc) || !mask.at(rr, cc)) continue;
                        int& l = labels[static_cast<std::size_t>(rr) * w + cc];
                        if (l < 0) {
                            l = lab;
                            queue.push_back({rr, cc});
                        }
                    }
                }
            }
        }
    }
    return labels;
}

std::vector<int> hull_halfplane(const Contour& contour) {
    const int n = static_cast<int>(contour.size());
    std::vector<int> vertices;
    if (n <= 2) {
        for (int i = 0; i < n; ++i) vertices.push_back(i);
        if (n == 2 && contour[0] == contour[1]) vertices.pop_back();
        return vertices;
    }

    std::vector<char> is_vertex(n, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const PixelPoint pi = contour[i], pj = contour[j];
            const std::int64_t len2 = stemdet::dist2(pi, pj);
            bool edge = true;
            for (int k = 0; k < n && edge; ++k) {
                if (k == i || k == j) continue;
                const std::int64_t o = stemdet::orient(pi, pj, contour[k]);
                if (o < 0) {
                    edge = false;
                } else if (o == 0) {
                    const PixelPoint pk = contour[k];
                    const std::int64_t dot =
                        static_cast<std::int64_t>(pk.row - pi.row) * (pj.row - pi.row) +
                        static_cast<std::int64_t>(pk.col - pi.col) * (pj.col - pi.col);
                    if (dot <= 0 || dot >= len2) edge = false;
                }
            }
            if (edge) is_vertex[i] = is_vertex[j] = 1;
        }
    }
    for (int i = 0; i < n; ++i)
        if (is_vertex[i]) vertices.push_back(i);
    return vertices;
}

std::vector<ConvexityDefect> defects_scan(const Contour& contour, const std::vector<int>& hull) {
    const int n = static_cast<int>(contour.size());
    const int k = static_cast<int>(hull.size());
    std::vector<ConvexityDefect> defects;
    if (n < 3 || k < 2) return defects;

    for (int e = 0; e < k; ++e) {
        const int ia = hull[e], ib = hull[(e + 1) % k];
        const PixelPoint pa = contour[ia], pb = contour[ib];
        const std::int64_t a = pb.row - pa.row;
        const std::int64_t b = -static_cast<std::int64_t>(pb.col - pa.col);
        const std::int64_t c = -(a * pa.col + b * pa.row);

        std::int64_t best_num = -1;
        int best = -1;
        for (int j = (ia + 1) % n; j != ib; j = (j + 1) % n) {
            const std::int64_t num = std::llabs(a * contour[j].col + b * contour[j].row + c);
            if (num > best_num) {
                best_num = num;
                best = j;
            }
        }
        if (best < 0) continue;
        ConvexityDefect d;
        d.hull_start = ia;
        d.hull_end = ib;
        d.farthest = best;
        d.depth = static_cast<double>(best_num) /
                  std::sqrt(static_cast<double>(a) * a + static_cast<double>(b) * b);
        defects.push_back(d);
    }
    return defects;
}

} // namespace oracles
