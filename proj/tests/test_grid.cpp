#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "odlab/errors.hpp"
#include "odlab/grid.hpp"

using namespace odlab;

TEST_CASE("grid layout and queries") {
    Grid2 g(8, 6, 0.5, {1.0, 2.0});
    CHECK(g.size() == 48);
    CHECK(g.width() == 4.0);
    CHECK(g.height() == 3.0);
    CHECK(g.center(0, 0).x == Catch::Approx(1.25));
    CHECK(g.center(0, 0).y == Catch::Approx(2.25));
    CHECK(g.index(3, 2) == 2 * 8 + 3);

    auto [ci, cj] = g.cell_of({2.6, 3.4});
    CHECK(ci == 3);
    CHECK(cj == 2);

    CHECK(g.contains_ball({3.0, 3.5}, 1.0));
    CHECK_FALSE(g.contains_ball({1.5, 3.5}, 1.0));
    CHECK(g.boundary_distance({3.0, 3.5}) == Catch::Approx(1.5));
    CHECK(g.boundary_distance({0.0, 3.5}) < 0.0);

    CHECK(g.same_layout(Grid2(8, 6, 0.5, {1.0, 2.0})));
    CHECK_FALSE(g.same_layout(Grid2(8, 6, 0.5)));

    CHECK_THROWS_AS(Grid2(3, 8, 0.1), InputError);
    CHECK_THROWS_AS(Grid2(8, 8, 0.0), InputError);
}

TEST_CASE("indicator set basics") {
    Grid2 g(8, 8, 0.125);
    IndicatorSet E(g);
    CHECK(E.count() == 0);
    E.set(2, 3, true);
    E.flip(2, 4);
    CHECK(E.count() == 2);
    CHECK(E.area() == Catch::Approx(2 * 0.125 * 0.125));
    E.flip(2, 4);
    CHECK(E.count() == 1);

    IndicatorSet C = E.complement();
    CHECK(C.count() == g.size() - 1);
    CHECK_FALSE(C.at(2, 3));

    CHECK(E.is_interface_cell(2, 3));
    CHECK(E.is_interface_cell(2, 2));
    CHECK_FALSE(E.is_interface_cell(6, 6));
}

TEST_CASE("component labels: order, areas, 4-connectivity") {
    Grid2 g(10, 10, 0.1);
    IndicatorSet E(g);
    testutil::fill_block(E, 0, 1, 0, 1);   // 4 cells, appears first
    testutil::fill_block(E, 5, 7, 0, 0);   // 3 cells, same bottom row
    testutil::fill_block(E, 2, 2, 2, 2);   // single cell touching block 1 only diagonally
    ComponentLabels L = label_components(E);
    REQUIRE(L.count == 3);
    CHECK(L.at(0, 0) == 1);
    CHECK(L.at(5, 0) == 2);
    CHECK(L.at(2, 2) == 3);  // diagonal contact does not merge
    CHECK(L.areas[0] == Catch::Approx(4 * 0.01));
    CHECK(L.areas[1] == Catch::Approx(3 * 0.01));
    CHECK(L.areas[2] == Catch::Approx(0.01));

    double total = 0.0;
    for (double a : L.areas) total += a;
    CHECK(total == Catch::Approx(E.area()));
}

namespace {

// quadratic-time reference: exact min distance between cell centers
ScalarField brute_distance(const IndicatorSet& E) {
    const Grid2& g = E.grid;
    ScalarField out(g, 2.0 * g.diameter());
    std::vector<std::pair<int, int>> src;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (E.at(i, j)) src.emplace_back(i, j);
    if (src.empty()) return out;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            long best = std::numeric_limits<long>::max();
            for (auto [si, sj] : src) {
                long dx = si - i, dy = sj - j;
                best = std::min(best, dx * dx + dy * dy);
            }
            out.at(i, j) = std::sqrt(static_cast<double>(best)) * g.h;
        }
    return out;
}

}  // namespace

TEST_CASE("distance transform equals quadratic-time reference") {
    for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
        Grid2 g(16, 12, 0.25);
        IndicatorSet E = testutil::make_random(g, seed, 0.2);
        ScalarField fast = distance_transform(E);
        ScalarField slow = brute_distance(E);
        for (std::size_t k = 0; k < fast.values.size(); ++k)
            REQUIRE(fast.values[k] == Catch::Approx(slow.values[k]).margin(1e-12));
    }
}

TEST_CASE("distance transform: sparse single source and empty sentinel") {
    Grid2 g(32, 32, 1.0 / 32);
    IndicatorSet E(g);
    E.set(5, 7, true);
    ScalarField d = distance_transform(E);
    CHECK(d.at(5, 7) == 0.0);
    CHECK(d.at(8, 11) == Catch::Approx(5.0 * g.h));  // 3-4-5 triangle

    IndicatorSet empty(g);
    ScalarField s = distance_transform(empty);
    for (double v : s.values) REQUIRE(v == 2.0 * g.diameter());
}

TEST_CASE("ball area and phase density") {
    Grid2 g(128, 128, 1.0 / 128);
    IndicatorSet full(g, true);
    Vec2 c{0.5, 0.5};
    double r = 0.25;
    auto [in, out] = ball_area(full, c, r);
    CHECK(out == 0.0);
    double pi = 3.14159265358979323846;
    CHECK(std::abs(in - pi * r * r) < 4.0 * pi * r * g.h);

    IndicatorSet half = testutil::make_halfplane_x(g, 0.5);
    double dens = phase_density(half, c, r);
    CHECK(std::abs(dens - 0.5 * pi) < 6.0 * g.h / r);

    CHECK_THROWS_AS(ball_area(full, c, 0.5 * g.h), UnresolvedScaleError);
}
