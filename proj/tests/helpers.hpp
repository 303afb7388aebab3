#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "odlab/grid.hpp"

namespace testutil {

// Disk by cell-center membership, strict inequality like the library probes.
inline odlab::IndicatorSet make_disk(const odlab::Grid2& g, odlab::Vec2 c, double R) {
    odlab::IndicatorSet E(g);
    const double R2 = R * R;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (odlab::norm2(g.center(i, j) - c) < R2) E.set(i, j, true);
    return E;
}

// Left half-plane {x < x0}.
inline odlab::IndicatorSet make_halfplane_x(const odlab::Grid2& g, double x0) {
    odlab::IndicatorSet E(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.center(i, j).x < x0) E.set(i, j, true);
    return E;
}

// Lower layer {y < y0}.
inline odlab::IndicatorSet make_layered(const odlab::Grid2& g, double y0) {
    odlab::IndicatorSet E(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.center(i, j).y < y0) E.set(i, j, true);
    return E;
}

// Lower-left quadrant {x < x0, y < y0}: boundary with one right-angle corner.
inline odlab::IndicatorSet make_quadrant(const odlab::Grid2& g, double x0, double y0) {
    odlab::IndicatorSet E(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            odlab::Vec2 p = g.center(i, j);
            if (p.x < x0 && p.y < y0) E.set(i, j, true);
        }
    return E;
}

// Axis-aligned block of cells, index ranges inclusive.
inline void fill_block(odlab::IndicatorSet& E, int i0, int i1, int j0, int j1) {
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) E.set(i, j, true);
}

inline odlab::IndicatorSet make_random(const odlab::Grid2& g, std::uint64_t seed,
                                       double fill = 0.5) {
    odlab::IndicatorSet E(g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (u(rng) < fill) E.set(i, j, true);
    return E;
}

inline odlab::ScalarField make_field(const odlab::Grid2& g,
                                     const std::function<double(odlab::Vec2)>& f) {
    odlab::ScalarField u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) u.at(i, j) = f(g.center(i, j));
    return u;
}

}  // namespace testutil
