#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "odlab/elliptic.hpp"
#include "odlab/errors.hpp"
#include "odlab/grid.hpp"

namespace odlab {

struct OptimizerConfig {
    double lambda = 10.0;
    double v0 = 0.0;
    int max_outer = 50;
    double pde_tol = 1e-8;
    int flip_pass_cap = 8;   // greedy sweeps per outer iteration
    std::uint64_t seed = 1;
};

struct OptimizerTrace {
    struct Row {
        int iter = 0;
        EnergyBreakdown energy;
        long flips = 0;
    };
    std::vector<Row> rows;
    enum class Stop { Converged, Cap, RolledBack } stop = Stop::Converged;
};

// Exact energy change of flipping one interface cell with the field frozen:
// the Dirichlet term swaps sigma on that cell, the perimeter counts the four
// in-grid neighbor faces, the volume penalty moves by one cell area.  Matches
// total_energy(after) - total_energy(before) to rounding because the
// cell-centered gradient does not depend on the phase.
inline double flip_delta(const IndicatorSet& E, const ScalarField& u,
                         const PhaseCoefficients& coeff, const OptimizerConfig& cfg, int i,
                         int j) {
    if (!E.grid.in_bounds(i, j)) throw InputError("flip_delta: cell outside the grid");
    if (!E.is_interface_cell(i, j))
        throw InputError("flip_delta: cell has no opposite-phase neighbor");
    const Grid2& g = E.grid;
    const double h = g.h, h2 = h * h;
    const bool inside = E.at(i, j);
    double gx, gy;
    gradient_at(u, i, j, gx, gy);
    double d_dirichlet = (coeff.on(!inside) - coeff.on(inside)) * (gx * gx + gy * gy) * h2;
    static constexpr int di[4] = {1, -1, 0, 0};
    static constexpr int dj[4] = {0, 0, 1, -1};
    double d_perimeter = 0.0;
    for (int k = 0; k < 4; ++k) {
        int ii = i + di[k], jj = j + dj[k];
        if (!g.in_bounds(ii, jj)) continue;  // domain-edge faces never count
        d_perimeter += (E.at(ii, jj) == inside) ? h : -h;
    }
    double area = E.area();
    double area_after = area + (inside ? -h2 : h2);
    double d_penalty = cfg.lambda * (std::abs(area_after - cfg.v0) - std::abs(area - cfg.v0));
    return d_dirichlet + d_perimeter + d_penalty;
}

// Observer for accepted flips; receives the set before the flip is applied.
using FlipHook = std::function<void(const IndicatorSet& before, int i, int j, double delta)>;

struct OptimizeResult {
    IndicatorSet E;
    ScalarField u;
    OptimizerTrace trace;
};

// Alternating minimization: solve the field on the current set, then greedy
// single-cell flips at the interface with the field frozen, then re-solve.
// An outer iteration whose re-solved energy did not decrease is rolled back
// and the run stops, so the recorded trace is strictly decreasing in total
// energy.  Identical seeds reproduce the run bit for bit.
inline OptimizeResult minimize(const IndicatorSet& E0, const PhaseCoefficients& coeff,
                               const BoundaryDatum& datum, const OptimizerConfig& cfg,
                               const FlipHook& on_flip = {}) {
    if (cfg.max_outer < 1) throw InputError("minimize: max_outer must be positive");
    if (cfg.flip_pass_cap < 1) throw InputError("minimize: flip_pass_cap must be positive");
    if (cfg.lambda < 0.0) throw InputError("minimize: lambda must be nonnegative");

    OptimizeResult res;
    res.E = E0;
    res.u = solve_dirichlet(res.E, coeff, datum, cfg.pde_tol);
    EnergyBreakdown cur = total_energy(res.E, res.u, coeff, cfg.lambda, cfg.v0);
    res.trace.rows.push_back({0, cur, 0});

    std::mt19937_64 rng(cfg.seed);
    const Grid2& g = E0.grid;
    const double h2 = g.h * g.h;

    // incremental state for fast sweeps; validated against flip_delta in tests
    ScalarField grad2(g);

    res.trace.stop = OptimizerTrace::Stop::Cap;
    for (int outer = 1; outer <= cfg.max_outer; ++outer) {
        grad2 = gradient_sq(res.u);
        IndicatorSet snapshot = res.E;

        double area = res.E.area();
        const double scale = std::max(1.0, std::abs(cur.total));
        const double accept_below = -1e-12 * scale;

        long flips = 0;
        std::vector<std::uint32_t> order;
        for (int pass = 0; pass < cfg.flip_pass_cap; ++pass) {
            order.clear();
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    if (res.E.is_interface_cell(i, j))
                        order.push_back(static_cast<std::uint32_t>(g.index(i, j)));
            std::shuffle(order.begin(), order.end(), rng);
            long accepted = 0;
            for (std::uint32_t k : order) {
                int i = static_cast<int>(k % g.nx);
                int j = static_cast<int>(k / g.nx);
                if (!res.E.is_interface_cell(i, j)) continue;  // interface moved
                const bool inside = res.E.at(i, j);
                double d_dir = (coeff.on(!inside) - coeff.on(inside)) * grad2.at(i, j) * h2;
                static constexpr int di[4] = {1, -1, 0, 0};
                static constexpr int dj[4] = {0, 0, 1, -1};
                double d_per = 0.0;
                for (int q = 0; q < 4; ++q) {
                    int ii = i + di[q], jj = j + dj[q];
                    if (!g.in_bounds(ii, jj)) continue;
                    d_per += (res.E.at(ii, jj) == inside) ? g.h : -g.h;
                }
                double area_after = area + (inside ? -h2 : h2);
                double d_pen =
                    cfg.lambda * (std::abs(area_after - cfg.v0) - std::abs(area - cfg.v0));
                double delta = d_dir + d_per + d_pen;
                if (delta < accept_below) {
                    if (on_flip) on_flip(res.E, i, j, delta);
                    res.E.flip(i, j);
                    area = area_after;
                    ++accepted;
                }
            }
            flips += accepted;
            if (accepted == 0) break;
        }

        if (flips == 0) {
            res.trace.stop = OptimizerTrace::Stop::Converged;
            break;
        }

        ScalarField u_new = solve_dirichlet(res.E, coeff, datum, cfg.pde_tol);
        EnergyBreakdown e_new = total_energy(res.E, u_new, coeff, cfg.lambda, cfg.v0);
        if (e_new.total >= cur.total) {
            // the frozen-field surrogate overshot; undo and stop
            res.E = std::move(snapshot);
            res.trace.stop = OptimizerTrace::Stop::RolledBack;
            break;
        }
        res.u = std::move(u_new);
        cur = e_new;
        res.trace.rows.push_back({outer, cur, flips});
    }
    return res;
}

// Centered disk whose area after clipping to the domain meets the target:
// the radius is bisected on the clipped cell count, so a full-domain target
// yields the full set instead of a disk with missing corners.
inline IndicatorSet init_disk(const Grid2& g, double target_area) {
    if (!(target_area > 0.0)) throw InputError("init_disk: area must be positive");
    Vec2 c{g.origin.x + 0.5 * g.width(), g.origin.y + 0.5 * g.height()};
    const double h2 = g.h * g.h;
    auto clipped_area = [&](double r) {
        double r2 = r * r;
        long n = 0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (norm2(g.center(i, j) - c) < r2) ++n;
        return static_cast<double>(n) * h2;
    };
    double lo = 0.0, hi = 0.75 * g.diameter();
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (clipped_area(mid) >= target_area)
            hi = mid;
        else
            lo = mid;
    }
    IndicatorSet E(g);
    const double r2 = hi * hi;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (norm2(g.center(i, j) - c) < r2) E.set(i, j, true);
    return E;
}

// Independent fair coin per cell.
inline IndicatorSet init_random(const Grid2& g, std::uint64_t seed) {
    IndicatorSet E(g);
    std::mt19937_64 rng(seed);
    for (auto& c : E.cells) c = static_cast<std::uint8_t>(rng() & 1u);
    return E;
}

}  // namespace odlab
