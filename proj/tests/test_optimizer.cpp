#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "odlab/errors.hpp"
#include "odlab/optimizer.hpp"

using namespace odlab;

TEST_CASE("flip delta equals the recomputed energy difference on a frozen field") {
    Grid2 g(16, 16, 1.0 / 16);
    IndicatorSet E = testutil::make_random(g, 21, 0.45);
    ScalarField u = testutil::make_field(g, [](Vec2 p) {
        return std::sin(3.0 * p.x) * p.y + 0.2 * p.x;
    });
    PhaseCoefficients coeff(1.0, 2.0);
    OptimizerConfig cfg;
    cfg.lambda = 3.0;
    cfg.v0 = 0.1;

    EnergyBreakdown before = total_energy(E, u, coeff, cfg.lambda, cfg.v0);
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int attempt = 0; attempt < 400 && checked < 40; ++attempt) {
        int i = static_cast<int>(rng() % g.nx);
        int j = static_cast<int>(rng() % g.ny);
        if (!E.is_interface_cell(i, j)) continue;  // outside flip_delta's domain
        ++checked;
        double delta = flip_delta(E, u, coeff, cfg, i, j);
        IndicatorSet F = E;
        F.flip(i, j);
        EnergyBreakdown after = total_energy(F, u, coeff, cfg.lambda, cfg.v0);
        REQUIRE(delta == Catch::Approx(after.total - before.total)
                             .margin(1e-12 * std::max(1.0, std::abs(before.total))));
    }
    REQUIRE(checked == 40);
}

TEST_CASE("minimize: strictly decreasing trace and bitwise deterministic reruns") {
    Grid2 g(32, 32, 1.0 / 32);
    PhaseCoefficients coeff(1.0, 2.0);
    BoundaryDatum datum = BoundaryDatum::linear(1.0, 0.0);
    OptimizerConfig cfg;
    cfg.lambda = 10.0;
    cfg.v0 = 0.5 * g.area();
    cfg.max_outer = 20;
    cfg.pde_tol = 1e-9;
    cfg.seed = 7;
    IndicatorSet E0 = init_disk(g, cfg.v0);

    OptimizeResult a = minimize(E0, coeff, datum, cfg);
    OptimizeResult b = minimize(E0, coeff, datum, cfg);

    REQUIRE(a.trace.rows.size() >= 2);  // something must happen from a centered disk
    for (std::size_t k = 0; k + 1 < a.trace.rows.size(); ++k)
        REQUIRE(a.trace.rows[k + 1].energy.total < a.trace.rows[k].energy.total);

    REQUIRE(a.E.cells == b.E.cells);
    REQUIRE(a.u.values == b.u.values);
    REQUIRE(a.trace.rows.size() == b.trace.rows.size());
    for (std::size_t k = 0; k < a.trace.rows.size(); ++k) {
        REQUIRE(a.trace.rows[k].energy.total == b.trace.rows[k].energy.total);
        REQUIRE(a.trace.rows[k].flips == b.trace.rows[k].flips);
    }
    REQUIRE(a.trace.stop == b.trace.stop);
}

TEST_CASE("every accepted flip matches a from-scratch replay oracle") {
    Grid2 g(24, 24, 1.0 / 24);
    PhaseCoefficients coeff(1.0, 2.0);
    BoundaryDatum datum = BoundaryDatum::linear(1.0, 0.5);
    OptimizerConfig cfg;
    cfg.lambda = 8.0;
    cfg.v0 = 0.4 * g.area();
    cfg.max_outer = 4;
    cfg.pde_tol = 1e-9;
    cfg.seed = 13;
    IndicatorSet E0 = init_disk(g, cfg.v0);

    struct Rec {
        int i, j;
        double delta;
    };
    std::vector<Rec> recs;
    OptimizeResult res = minimize(E0, coeff, datum, cfg,
                                  [&](const IndicatorSet&, int i, int j, double d) {
                                      recs.push_back({i, j, d});
                                  });

    // replay: rows after the first hold the flip count of each surviving outer
    // iteration; hooks from a rolled-back final iteration are ignored
    IndicatorSet E = E0;
    std::size_t next = 0;
    for (std::size_t row = 1; row < res.trace.rows.size(); ++row) {
        ScalarField u = solve_dirichlet(E, coeff, datum, cfg.pde_tol);
        EnergyBreakdown cur = total_energy(E, u, coeff, cfg.lambda, cfg.v0);
        double scale = std::max(1.0, std::abs(cur.total));
        for (long f = 0; f < res.trace.rows[row].flips; ++f) {
            REQUIRE(next < recs.size());
            const Rec& rec = recs[next++];
            IndicatorSet F = E;
            F.flip(rec.i, rec.j);
            EnergyBreakdown after = total_energy(F, u, coeff, cfg.lambda, cfg.v0);
            REQUIRE(rec.delta ==
                    Catch::Approx(after.total - cur.total).margin(1e-12 * scale));
            E = F;
            cur = after;
        }
    }
    REQUIRE(E.cells == res.E.cells);
}

TEST_CASE("disk initialization meets its target area") {
    Grid2 g(64, 64, 1.0 / 64);

    IndicatorSet full = init_disk(g, g.area());
    CHECK(full.count() == g.size());  // corners are not left out

    double target = 0.1;
    IndicatorSet E = init_disk(g, target);
    CHECK(std::abs(E.area() - target) < 0.01);

    CHECK_THROWS_AS(init_disk(g, 0.0), InputError);
}

TEST_CASE("random initialization is seeded and balanced") {
    Grid2 g(32, 32, 1.0 / 32);
    IndicatorSet a = init_random(g, 11);
    IndicatorSet b = init_random(g, 11);
    IndicatorSet c = init_random(g, 12);
    CHECK(a.cells == b.cells);
    CHECK(a.cells != c.cells);
    double fill = static_cast<double>(a.count()) / static_cast<double>(g.size());
    CHECK(fill > 0.3);
    CHECK(fill < 0.7);
}

TEST_CASE("minimize rejects malformed settings") {
    Grid2 g(16, 16, 1.0 / 16);
    IndicatorSet E0(g);
    PhaseCoefficients coeff(1.0, 2.0);
    BoundaryDatum d = BoundaryDatum::linear(1, 0);
    OptimizerConfig cfg;
    cfg.max_outer = 0;
    CHECK_THROWS_AS(minimize(E0, coeff, d, cfg), InputError);
    cfg.max_outer = 5;
    cfg.flip_pass_cap = 0;
    CHECK_THROWS_AS(minimize(E0, coeff, d, cfg), InputError);
    cfg.flip_pass_cap = 2;
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(minimize(E0, coeff, d, cfg), InputError);
}
