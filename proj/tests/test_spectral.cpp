#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "odlab/errors.hpp"
#include "odlab/spectral.hpp"

using namespace odlab;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> dense_a_grid(std::size_t n) {
    std::vector<double> a(n);
    const double lo = 1e-3, hi = 2.0 * kPi - 1e-3;
    for (std::size_t k = 0; k < n; ++k)
        a[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return a;
}
}  // namespace

TEST_CASE("spectral configuration validation") {
    CHECK_THROWS_AS(SpectralConfig(0.0, 1.0, 1.0), InputError);
    CHECK_THROWS_AS(SpectralConfig(2.0, 1.0, 1.0), InputError);
    CHECK_THROWS_AS(SpectralConfig(1.0, 2.0, 0.0), InputError);
    CHECK_THROWS_AS(SpectralConfig(1.0, 2.0, 2.0 * kPi), InputError);
    SpectralConfig cfg(1.0, 2.0, 1.0);
    CHECK(cfg.ratio() == 2.0);
    CHECK(cfg.C() == Catch::Approx(8.0));
}

TEST_CASE("determinant function shape") {
    SpectralConfig cfg(1.0, 2.0, 1.0);
    // zero at the origin, strictly negative just inside
    CHECK(det_function(0.0, cfg) == Catch::Approx(0.0).margin(1e-15));
    for (double w : {1e-3, 1e-2, 0.05}) CHECK(det_function(w, cfg) < 0.0);

    // reflection symmetry of the sector angle
    SpectralConfig mirror(1.0, 2.0, 2.0 * kPi - 1.0);
    for (double w : {0.1, 0.37, 0.62, 0.93})
        CHECK(det_function(w, cfg) == Catch::Approx(det_function(w, mirror)).margin(1e-13));

    // pointwise monotone in the contrast constant C (rho=2 has C=8, rho=4 has C=16/9)
    SpectralConfig big_c(1.0, 2.0, 1.3);
    SpectralConfig small_c(1.0, 4.0, 1.3);
    REQUIRE(big_c.C() > small_c.C());
    for (double w : {0.1, 0.25, 0.4, 0.75, 0.9})
        CHECK(det_function(w, big_c) <= det_function(w, small_c) + 1e-15);

    CHECK_THROWS_AS(det_function(0.5, SpectralConfig(1.0, 1.0, 1.0)), InputError);
}

TEST_CASE("smallest root: classical, symmetric, and frozen cases") {
    {
        SpectralResult classical = smallest_root(SpectralConfig(2.0, 2.0, 1.0));
        CHECK(classical.omega1 == 1.0);
        CHECK(classical.nu1 == 1.0);
        CHECK(classical.satisfied_quarter);
        CHECK(classical.satisfied_unit);
    }
    for (double ratio : {1.5, 2.0, 4.0, 10.0}) {
        SpectralResult r = smallest_root(SpectralConfig(1.0, ratio, kPi));
        CHECK(r.omega1 == Catch::Approx(1.0).margin(1e-6));
        CHECK(r.nu1 == Catch::Approx(1.0).margin(2e-6));
        CHECK(r.satisfied_unit);
    }
    {
        // strong contrast, narrow sector; value pinned by an offline scan
        SpectralResult r = smallest_root(SpectralConfig(1.0, 10.0, 0.1));
        CHECK(r.nu1 == Catch::Approx(0.77753419).margin(1e-6));
        CHECK(r.bound_lower == Catch::Approx(std::min(std::pow(kPi / 0.1, 2),
                                                      std::pow(kPi / (2.0 * kPi - 0.1), 2))));
        CHECK(r.satisfied_quarter);
    }
    {
        // the root of f itself must vanish at the reported omega1
        SpectralConfig cfg(1.0, 3.0, 2.0);
        SpectralResult r = smallest_root(cfg);
        CHECK(std::abs(det_function(r.omega1, cfg)) < 1e-9);
        CHECK(r.nu1 == Catch::Approx(r.omega1 * r.omega1));
    }
}

TEST_CASE("discrete transmission eigenvalue matches the determinant root") {
    struct Row {
        double a;
        double ratio;
    };
    for (const Row& row : {Row{0.5, 2.0}, Row{2.0, 4.0}, Row{kPi, 1.5}, Row{5.0, 10.0}}) {
        SpectralConfig cfg(1.0, row.ratio, row.a);
        double nu_det = smallest_root(cfg).nu1;
        double nu_fd = discrete_eigenvalue(cfg, 256);
        CHECK(nu_fd == Catch::Approx(nu_det).epsilon(1e-3));
    }
    {
        SpectralConfig cfg(1.0, 2.0, 1.0);
        double nu_det = smallest_root(cfg).nu1;
        CHECK(discrete_eigenvalue(cfg, 1024) == Catch::Approx(nu_det).epsilon(1e-4));
    }
    CHECK_THROWS_AS(discrete_eigenvalue(SpectralConfig(1.0, 2.0, 1.0), 255), InputError);
    CHECK_THROWS_AS(discrete_eigenvalue(SpectralConfig(1.0, 2.0, 1.0), 128), InputError);
}

TEST_CASE("spectral floor over a dense sector grid stays above one quarter") {
    CHECK_THROWS_AS(gamma_gap(2.0, dense_a_grid(100)), InputError);
    CHECK_THROWS_AS(gamma_gap(1.0, dense_a_grid(512)), InputError);
    {
        std::vector<double> short_span(512);
        for (std::size_t k = 0; k < 512; ++k) short_span[k] = 0.1 + 5.0 * k / 511.0;
        CHECK_THROWS_AS(gamma_gap(2.0, short_span), InputError);
    }
    double floor2 = gamma_gap(2.0, dense_a_grid(512));
    CHECK(floor2 > 0.25);
    CHECK(floor2 < 1.0);  // narrow sectors do dip below the classical value
}

TEST_CASE("circle Poincare inequality check") {
    const int n = 8192;
    {
        // the first harmonic saturates the inequality
        std::vector<double> u(n);
        for (int k = 0; k < n; ++k) u[k] = std::cos(2.0 * kPi * k / n + 0.37);
        WirtingerCheck c = wirtinger_check(u, 0.8);
        CHECK(c.holds);
        CHECK(c.lhs == Catch::Approx(c.rhs).epsilon(1e-6));
    }
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> u(n, 0.0);
        for (int mode = 1; mode <= 8; ++mode) {
            double a = amp(rng), b = amp(rng);
            for (int k = 0; k < n; ++k) {
                double th = 2.0 * kPi * k / n;
                u[k] += a * std::cos(mode * th) + b * std::sin(mode * th);
            }
        }
        WirtingerCheck c = wirtinger_check(u, 0.37);
        REQUIRE(c.holds);
        REQUIRE(c.lhs <= c.rhs * (1.0 + 1e-6) + 1e-12);
    }
    CHECK_THROWS_AS(wirtinger_check(std::vector<double>(8, 1.0), 1.0), InputError);
    CHECK_THROWS_AS(wirtinger_check(std::vector<double>(32, 1.0), 0.0), InputError);
}
