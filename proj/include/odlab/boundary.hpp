#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "odlab/errors.hpp"
#include "odlab/grid.hpp"

namespace odlab {

// Polyline boundary between the two phases.  Closed chains wrap last->first;
// open chains start and end on the border of the cell-center lattice (the
// phase interface runs out of the domain there).  Chains are oriented with
// the true phase on the left, so right-hand segment normals point from E
// into the complement.
struct BoundaryCurve {
    struct Chain {
        std::vector<Vec2> pts;
        bool closed = false;

        std::size_t segment_count() const {
            if (pts.size() < 2) return 0;
            return closed ? pts.size() : pts.size() - 1;
        }
    };

    std::vector<Chain> chains;
    double h = 0.0;  // resolution of the source grid; sets probe floors

    std::size_t segment_count() const {
        std::size_t n = 0;
        for (const auto& c : chains) n += c.segment_count();
        return n;
    }

    template <class F>
    void for_each_segment(F&& f) const {
        for (const auto& c : chains) {
            std::size_t m = c.segment_count();
            for (std::size_t s = 0; s < m; ++s) {
                const Vec2& a = c.pts[s];
                const Vec2& b = c.pts[(s + 1) % c.pts.size()];
                f(a, b);
            }
        }
    }

    double total_length() const {
        double L = 0.0;
        for_each_segment([&](const Vec2& a, const Vec2& b) { L += dist(a, b); });
        return L;
    }
};

namespace detail {

// Doubled integer coordinates of crossing vertices: the midpoint of the edge
// between cell centers (i,j) and (i+1,j) is (2i+1, 2j); between (i,j) and
// (i,j+1) it is (2i, 2j+1).  Exact keys, no floating-point matching.
using VertexKey = std::pair<std::int32_t, std::int32_t>;

inline Vec2 key_to_point(const VertexKey& k, const Grid2& g) {
    return {g.origin.x + (0.5 + 0.5 * k.first) * g.h,
            g.origin.y + (0.5 + 0.5 * k.second) * g.h};
}

}  // namespace detail

// Phase interface by marching squares on the cell-center lattice at level 1/2.
// All crossings are edge midpoints (the indicator is binary), saddles split so
// that the true phase stays 4-connected.  Chains of raw length >= 16h get one
// tangential averaging pass ((prev + 2v + next)/4, endpoints of open chains
// pinned) which removes the staircase length bias of the raw polyline; short
// loops keep their raw diamond shape so single-cell components stay at the
// documented length ratio 1/sqrt(2) against the edge-count perimeter.
inline BoundaryCurve extract_boundary(const IndicatorSet& E) {
    const Grid2& g = E.grid;
    using detail::VertexKey;
    std::map<VertexKey, VertexKey> next;  // oriented segment start -> end

    auto emit = [&](VertexKey a, VertexKey b) { next[a] = b; };

    for (int i = 0; i + 1 < g.nx; ++i) {
        for (int j = 0; j + 1 < g.ny; ++j) {
            int code = (E.at(i, j) ? 1 : 0) | (E.at(i + 1, j) ? 2 : 0) |
                       (E.at(i + 1, j + 1) ? 4 : 0) | (E.at(i, j + 1) ? 8 : 0);
            if (code == 0 || code == 15) continue;
            VertexKey bot{2 * i + 1, 2 * j};
            VertexKey right{2 * i + 2, 2 * j + 1};
            VertexKey top{2 * i + 1, 2 * j + 2};
            VertexKey left{2 * i, 2 * j + 1};
            switch (code) {
                case 1: emit(bot, left); break;
                case 2: emit(right, bot); break;
                case 3: emit(right, left); break;
                case 4: emit(top, right); break;
                case 5:  // saddle: true corners at (i,j) and (i+1,j+1) stay apart
                    emit(bot, left);
                    emit(top, right);
                    break;
                case 6: emit(top, bot); break;
                case 7: emit(top, left); break;
                case 8: emit(left, top); break;
                case 9: emit(bot, top); break;
                case 10:  // saddle, mirrored
                    emit(right, bot);
                    emit(left, top);
                    break;
                case 11: emit(right, top); break;
                case 12: emit(left, right); break;
                case 13: emit(bot, right); break;
                case 14: emit(left, bot); break;
            }
        }
    }

    BoundaryCurve curve;
    curve.h = g.h;

    std::map<VertexKey, int> indegree;
    for (const auto& [a, b] : next) ++indegree[b];

    auto walk = [&](VertexKey start, bool closed) {
        BoundaryCurve::Chain ch;
        ch.closed = closed;
        VertexKey cur = start;
        while (true) {
            ch.pts.push_back(detail::key_to_point(cur, g));
            auto it = next.find(cur);
            if (it == next.end()) break;
            VertexKey nxt = it->second;
            next.erase(it);
            if (closed && nxt == start) break;
            cur = nxt;
        }
        curve.chains.push_back(std::move(ch));
    };

    // open chains first (no incoming segment), then remaining cycles
    std::vector<VertexKey> opens;
    for (const auto& [a, b] : next)
        if (indegree.find(a) == indegree.end()) opens.push_back(a);
    for (const auto& a : opens)
        if (next.count(a)) walk(a, false);
    while (!next.empty()) walk(next.begin()->first, true);

    for (auto& ch : curve.chains) {
        double raw_len = 0.0;
        for (std::size_t s = 0; s + 1 < ch.pts.size(); ++s) raw_len += dist(ch.pts[s], ch.pts[s + 1]);
        if (ch.closed && ch.pts.size() >= 2) raw_len += dist(ch.pts.back(), ch.pts.front());
        if (raw_len < 16.0 * g.h) continue;
        std::vector<Vec2> sm = ch.pts;
        const std::size_t n = ch.pts.size();
        if (ch.closed) {
            for (std::size_t s = 0; s < n; ++s) {
                const Vec2& p = ch.pts[(s + n - 1) % n];
                const Vec2& q = ch.pts[s];
                const Vec2& r = ch.pts[(s + 1) % n];
                sm[s] = (p + 2.0 * q + r) / 4.0;
            }
        } else {
            for (std::size_t s = 1; s + 1 < n; ++s)
                sm[s] = (ch.pts[s - 1] + 2.0 * ch.pts[s] + ch.pts[s + 1]) / 4.0;
        }
        ch.pts = std::move(sm);
    }
    return curve;
}

// Per-segment data used by the probe operations.
struct CurveSegment {
    Vec2 a, b;
    Vec2 midpoint;
    Vec2 normal;  // unit, from the true phase into the complement
    double length = 0.0;
};

inline std::vector<CurveSegment> curve_segments(const BoundaryCurve& curve) {
    std::vector<CurveSegment> segs;
    segs.reserve(curve.segment_count());
    curve.for_each_segment([&](const Vec2& a, const Vec2& b) {
        CurveSegment s;
        s.a = a;
        s.b = b;
        s.midpoint = (a + b) / 2.0;
        s.normal = right_normal(a, b);
        s.length = dist(a, b);
        if (s.length > 0.0) segs.push_back(s);
    });
    return segs;
}

// Sum of segment lengths whose midpoints lie in B_r(center): the perimeter of
// E relative to the ball at the polyline level.  Monotone nondecreasing in r.
inline double relative_perimeter(const IndicatorSet& E, const Vec2& center, double r) {
    if (r < 2.0 * E.grid.h)
        throw UnresolvedScaleError("relative_perimeter: r below twice the cell size");
    double L = 0.0;
    const double r2 = r * r;
    extract_boundary(E).for_each_segment([&](const Vec2& a, const Vec2& b) {
        Vec2 m = (a + b) / 2.0;
        if (norm2(m - center) < r2) L += dist(a, b);
    });
    return L;
}

inline double relative_perimeter(const BoundaryCurve& curve, const Vec2& center, double r) {
    if (r < 2.0 * curve.h)
        throw UnresolvedScaleError("relative_perimeter: r below twice the cell size");
    double L = 0.0;
    const double r2 = r * r;
    curve.for_each_segment([&](const Vec2& a, const Vec2& b) {
        Vec2 m = (a + b) / 2.0;
        if (norm2(m - center) < r2) L += dist(a, b);
    });
    return L;
}

// Points along the curve with spacing at most `spacing`, each carrying its
// share of arclength and the sub-segment it starts.  Original vertices are
// kept.  Distance queries measure against the sub-segments, so they return
// the exact distance to the polyline, not to a sample cloud.
struct CurveSamples {
    std::vector<Vec2> pts;
    std::vector<Vec2> ends;  // far endpoint of the sub-segment at pts[k]
    std::vector<double> ds;  // arclength weight per point
    double max_len = 0.0;    // longest sub-segment, bounds index search rings
    // uniform-bucket index keyed on sub-segment start points
    double cell = 0.0;
    Vec2 lo{0.0, 0.0};
    int bx = 0, by = 0;
    std::vector<std::vector<std::int32_t>> buckets;

    void build_index() {
        if (pts.empty()) return;
        Vec2 hi = pts[0];
        lo = pts[0];
        for (const auto& p : pts) {
            lo.x = std::min(lo.x, p.x);
            lo.y = std::min(lo.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
        double span = std::max(hi.x - lo.x, hi.y - lo.y);
        // cells a few sub-segments wide: finer wastes ring traversal on empty
        // buckets for queries far from the curve, coarser piles segments up
        cell = std::max({span / 256.0, 4.0 * max_len, 1e-300});
        bx = static_cast<int>((hi.x - lo.x) / cell) + 1;
        by = static_cast<int>((hi.y - lo.y) / cell) + 1;
        buckets.assign(static_cast<std::size_t>(bx) * by, {});
        for (std::size_t k = 0; k < pts.size(); ++k) {
            int ix = static_cast<int>((pts[k].x - lo.x) / cell);
            int iy = static_cast<int>((pts[k].y - lo.y) / cell);
            ix = std::clamp(ix, 0, bx - 1);
            iy = std::clamp(iy, 0, by - 1);
            buckets[static_cast<std::size_t>(iy) * bx + ix].push_back(
                static_cast<std::int32_t>(k));
        }
    }

    // exact distance to the polyline; ring search over buckets, widened by
    // max_len because a sub-segment can stick out of its anchor's bucket
    double nearest(const Vec2& q) const {
        if (pts.empty()) return std::numeric_limits<double>::infinity();
        int ix = std::clamp(static_cast<int>((q.x - lo.x) / cell), 0, bx - 1);
        int iy = std::clamp(static_cast<int>((q.y - lo.y) / cell), 0, by - 1);
        double best2 = std::numeric_limits<double>::infinity();
        int max_ring = std::max(bx, by);
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (best2 < std::numeric_limits<double>::infinity()) {
                double safe = (static_cast<double>(ring) - 1.0) * cell - max_len;
                if (safe > 0.0 && best2 <= safe * safe) break;
            }
            for (int dy = -ring; dy <= ring; ++dy) {
                int yy = iy + dy;
                if (yy < 0 || yy >= by) continue;
                // perimeter of the ring only: full dx range on the top and
                // bottom rows, just the two side cells in between
                int step = (std::abs(dy) == ring || ring == 0) ? 1 : 2 * ring;
                for (int dx = -ring; dx <= ring; dx += step) {
                    int xx = ix + dx;
                    if (xx < 0 || xx >= bx) continue;
                    for (std::int32_t k : buckets[static_cast<std::size_t>(yy) * bx + xx]) {
                        double d = dist_to_segment(q, pts[k], ends[k]);
                        best2 = std::min(best2, d * d);
                    }
                }
            }
        }
        return std::sqrt(best2);
    }
};

inline CurveSamples densify_curve(const BoundaryCurve& curve, double spacing) {
    CurveSamples out;
    curve.for_each_segment([&](const Vec2& a, const Vec2& b) {
        double len = dist(a, b);
        if (len == 0.0) return;
        int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
        double dp = len / n;
        for (int k = 0; k < n; ++k) {
            Vec2 s = a + (b - a) * (static_cast<double>(k) / n);
            Vec2 e = a + (b - a) * (static_cast<double>(k + 1) / n);
            out.pts.push_back(s);
            out.ends.push_back(e);
            out.ds.push_back(dp);
            out.max_len = std::max(out.max_len, dist(s, e));
        }
    });
    out.build_index();
    return out;
}

}  // namespace odlab
