#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "odlab/boundary.hpp"
#include "odlab/config.hpp"
#include "odlab/diagnostics.hpp"
#include "odlab/elliptic.hpp"
#include "odlab/errors.hpp"
#include "odlab/grid.hpp"
#include "odlab/io.hpp"
#include "odlab/optimizer.hpp"
#include "odlab/spectral.hpp"

namespace odlab {

// Process exit codes; scripts match on these, so they are part of the contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCap = 3;
inline constexpr int kExitSolver = 4;
inline constexpr int kExitClaim = 5;

namespace detail {

// Worker count from ODLAB_THREADS: unset or 0 means one per hardware thread.
// The ceiling keeps a stray value from spawning thousands of threads.
inline int thread_budget() {
    const char* env = std::getenv("ODLAB_THREADS");
    long v = 0;
    if (env != nullptr && *env != '\0') {
        char* end = nullptr;
        v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 0)
            throw InputError("ODLAB_THREADS: expected a nonnegative integer");
    }
    if (v == 0) v = static_cast<long>(std::thread::hardware_concurrency());
    return static_cast<int>(std::clamp(v, 1L, 256L));
}

// Runs fn(k) for k in [0, n) over at most `budget` threads.  Callers write
// results into slot k of a preallocated buffer, so output bytes cannot depend
// on the schedule.  If several slots throw, the lowest index wins, matching
// what a serial loop would surface.
template <class Fn>
inline void parallel_for(std::size_t n, int budget, const Fn& fn) {
    std::size_t workers = std::min<std::size_t>(std::max(budget, 1), n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::vector<std::exception_ptr> errs(n);
    std::atomic<std::size_t> next{0};
    auto run = [&]() {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= n) return;
            try {
                fn(k);
            } catch (...) {
                errs[k] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    for (std::size_t k = 0; k < n; ++k)
        if (errs[k]) std::rethrow_exception(errs[k]);
}

inline IndicatorSet load_indicator(const std::string& path, double h) {
    if (path.ends_with(".pgm")) return read_indicator_pgm(path, h);
    return read_indicator_text(path);
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + p.string());
    return os;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// solve: run the alternating minimization and dump set, field, and trace.

inline int cmd_solve(const ExperimentConfig& cfg, const std::string& out_dir) {
    Grid2 g(cfg.nx, cfg.ny, cfg.h);
    PhaseCoefficients coeff(cfg.alpha, cfg.beta);
    BoundaryDatum datum = cfg.datum_kind == "angular"
                              ? BoundaryDatum::angular(cfg.datum_k)
                              : BoundaryDatum::linear(cfg.datum_gx, cfg.datum_gy);

    OptimizerConfig ocfg;
    ocfg.lambda = cfg.lambda;
    ocfg.v0 = cfg.resolved_v0();
    ocfg.max_outer = cfg.max_outer;
    ocfg.pde_tol = cfg.pde_tol;
    ocfg.flip_pass_cap = cfg.flip_pass_cap;
    ocfg.seed = cfg.seed;

    IndicatorSet E0(g);
    if (cfg.init == "disk")
        E0 = init_disk(g, ocfg.v0);
    else if (cfg.init == "random")
        E0 = init_random(g, cfg.seed);
    else
        E0 = detail::load_indicator(cfg.e_file, cfg.h);
    if (!E0.grid.same_layout(g)) throw InputError("solve: initial set does not match the grid");

    OptimizeResult res = minimize(E0, coeff, datum, ocfg);

    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    write_indicator_pgm(res.E, (out / "E.pgm").string());
    write_field_f64(res.u, (out / "u.f64").string());

    std::ofstream os = detail::open_out(out / "trace.csv");
    os << "iter,dirichlet,perimeter,penalty,total,area,flips\n";
    for (const auto& row : res.trace.rows)
        os << row.iter << ',' << detail::fmt_double(row.energy.dirichlet) << ','
           << detail::fmt_double(row.energy.perimeter) << ','
           << detail::fmt_double(row.energy.penalty) << ','
           << detail::fmt_double(row.energy.total) << ','
           << detail::fmt_double(row.energy.area) << ',' << row.flips << '\n';

    return res.trace.stop == OptimizerTrace::Stop::Cap ? kExitCap : kExitOk;
}

// ---------------------------------------------------------------------------
// diagnose: run the selected probes over sampled boundary vertices.

namespace detail {

struct ProbeRow {
    std::string type;
    Vec2 p{0.0, 0.0};
    double r = 0.0;
    double value = 0.0;
    std::vector<double> extras;
};

inline void write_probe_rows(std::ostream& os, const std::vector<ProbeRow>& rows) {
    for (const auto& row : rows) {
        os << row.type << ',' << fmt_double(row.p.x) << ',' << fmt_double(row.p.y) << ','
           << fmt_double(row.r) << ',' << fmt_double(row.value);
        for (double e : row.extras) os << ',' << fmt_double(e);
        os << '\n';
    }
}

}  // namespace detail

inline int cmd_diagnose(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.e_file.empty()) throw InputError("diagnose: e_file is required");
    IndicatorSet E = detail::load_indicator(cfg.e_file, cfg.h);
    const Grid2& g = E.grid;

    std::optional<ScalarField> u;
    if (!cfg.u_file.empty()) {
        u = read_field_f64(cfg.u_file);
        if (!u->grid.same_layout(g))
            throw InputError("diagnose: field layout does not match the set");
    }
    for (const char* name : {"monotonicity", "flat", "ipp"})
        if (cfg.probe_selected(name) && !u)
            throw InputError(std::string("diagnose: probe '") + name + "' needs u_file");

    PhaseCoefficients coeff(cfg.alpha, cfg.beta);
    std::optional<ScalarField> sigma;
    if (u) sigma = coefficient_field(E, coeff);

    BoundaryCurve curve = extract_boundary(E);

    // every sample_stride-th vertex, in chain order
    std::vector<Vec2> points;
    for (const auto& ch : curve.chains)
        for (std::size_t v = 0; v < ch.pts.size(); v += static_cast<std::size_t>(cfg.sample_stride))
            points.push_back(ch.pts[v]);

    // dyadic radii, ascending
    std::vector<double> radii;
    for (double r = cfg.resolved_radii_max(); r >= cfg.resolved_radii_min(); r *= 0.5)
        radii.push_back(r);
    std::reverse(radii.begin(), radii.end());

    // probe families in listed order, each at most once
    std::vector<std::string> families;
    for (const auto& p : cfg.probes)
        if (std::find(families.begin(), families.end(), p) == families.end())
            families.push_back(p);

    const int budget = detail::thread_budget();
    std::vector<detail::ProbeRow> rows;

    std::optional<BetaContext> beta_ctx;
    auto context = [&]() -> const BetaContext& {
        if (!beta_ctx) beta_ctx = make_beta_context(curve);
        return *beta_ctx;
    };

    std::optional<DichotomyReport> dichotomy;

    for (const auto& family : families) {
        if (family == "ahlfors") {
            AhlforsProfile prof = ahlfors_profile(curve, g, points, radii);
            for (const auto& row : prof.rows)
                if (!row.skipped) rows.push_back({"ahlfors", row.point, row.r, row.ratio, {}});
            rows.push_back({"ahlfors_ca", {0.0, 0.0}, 0.0, prof.c_a, {}});
        } else if (family == "density") {
            for (const auto& p : points)
                for (double r : radii) {
                    if (r < 2.0 * g.h || !g.contains_ball(p, r)) continue;
                    rows.push_back({"density", p, r, h_density(E, p, r), {}});
                }
        } else if (family == "conditionb") {
            ScalarField dt_set = distance_transform(E);
            ScalarField dt_comp = distance_transform(E.complement());
            for (const auto& p : points)
                for (double r : radii) {
                    if (r < 4.0 * g.h || !g.contains_ball(p, r)) continue;
                    ConditionB cb = condition_b(E, dt_set, dt_comp, p, r);
                    rows.push_back({"conditionb", p, r, cb.rho_in, {cb.rho_out}});
                }
        } else if (family == "excess") {
            for (const auto& p : points)
                for (double r : radii) {
                    if (r < 4.0 * curve.h || !g.contains_ball(p, r)) continue;
                    try {
                        rows.push_back({"excess", p, r, excess(curve, p, r), {}});
                    } catch (const DegenerateProbeError&) {
                    }
                }
        } else if (family == "beta") {
            if (points.empty()) continue;
            const BetaContext& ctx = context();
            std::vector<std::vector<detail::ProbeRow>> slots(points.size());
            detail::parallel_for(points.size(), budget, [&](std::size_t k) {
                for (double r : radii) {
                    if (r < 4.0 * curve.h || !g.contains_ball(points[k], r)) continue;
                    slots[k].push_back({"beta", points[k], r, beta_number(ctx, points[k], r), {}});
                }
            });
            for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
        } else if (family == "twopoint") {
            for (const auto& p : points) {
                TwoPointReport rep = circle_two_point_test(curve, p, radii);
                for (const auto& [s, count] : rep.per_radius)
                    rows.push_back({"twopoint", p, s, static_cast<double>(count), {}});
            }
        } else if (family == "carleson") {
            if (points.empty()) continue;
            const BetaContext& ctx = context();
            CurveSamples walk = densify_curve(curve, curve.h);
            std::vector<std::optional<detail::ProbeRow>> slots(points.size());
            detail::parallel_for(points.size(), budget, [&](std::size_t k) {
                // largest dyadic radius whose ball fits; the sum spans the
                // scales below it, so one row per point carries the profile
                for (std::size_t q = radii.size(); q-- > 0;) {
                    double r = radii[q];
                    if (r < 8.0 * curve.h || !g.contains_ball(points[k], r)) continue;
                    double v = carleson_sum(ctx, walk, cfg.eps_carleson, points[k], r);
                    slots[k] = detail::ProbeRow{"carleson", points[k], r, v, {}};
                    break;
                }
            });
            for (auto& s : slots)
                if (s) rows.push_back(std::move(*s));
        } else if (family == "flat") {
            double r = radii.empty() ? 0.0 : radii.back();
            if (r < 16.0 * curve.h) continue;
            for (const auto& p : points) {
                auto hit = find_flat_ball(curve, *u, *sigma, p, r, cfg.eps_flat, cfg.lambda);
                if (hit)
                    rows.push_back({"flat", p, r, hit->a, {hit->t, hit->y.x, hit->y.y}});
                else
                    rows.push_back({"flat", p, r, 0.0, {0.0, 0.0, 0.0}});
            }
        } else if (family == "monotonicity") {
            for (const auto& p : points) {
                std::vector<double> fit;
                for (double r : radii)
                    if (r >= 2.0 * g.h && g.contains_ball(p, r)) fit.push_back(r);
                if (fit.size() < 2) continue;
                MonotoneProfile prof = monotonicity_profile(*u, *sigma, coeff, p, fit);
                for (const auto& row : prof.rows)
                    rows.push_back({"monotonicity", p, row.r, row.normalized, {row.energy}});
                rows.push_back({"monotonicity_violations", p, 0.0,
                                static_cast<double>(prof.violations.size()), {}});
            }
        } else if (family == "ipp") {
            for (const auto& p : points)
                for (double r : radii) {
                    if (r < 4.0 * g.h || !g.contains_ball(p, r)) continue;
                    auto [res1, res2] = ipp_residuals(*u, *sigma, p, r);
                    rows.push_back({"ipp", p, r, res1, {res2}});
                }
        } else if (family == "dichotomy") {
            dichotomy = component_dichotomy(E, cfg.eps0, cfg.c0);
        }
    }

    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);

    std::ofstream os = detail::open_out(out / "probes.csv");
    os << "probe_type,x,y,r,value\n";
    detail::write_probe_rows(os, rows);

    if (dichotomy) {
        std::ofstream ds = detail::open_out(out / "dichotomy.csv");
        ds << "i,j,dist,min_area,far,quant\n";
        for (const auto& pr : dichotomy->pairs)
            ds << pr.i << ',' << pr.j << ',' << detail::fmt_double(pr.dist) << ','
               << detail::fmt_double(pr.min_area) << ',' << (pr.passes_far ? 1 : 0) << ','
               << (pr.passes_quant ? 1 : 0) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// spectral: cross-validated eigenvalue sweep over the (a, ratio) product grid.

inline int cmd_spectral(const ExperimentConfig& cfg, const std::string& out_dir) {
    struct SweepRow {
        double a = 0.0, ratio = 0.0;
        SpectralResult det;
        double omega_fd = std::numeric_limits<double>::quiet_NaN();
        bool failed = false;
    };
    std::vector<SweepRow> table;
    for (double a : cfg.spectral_a)
        for (double ratio : cfg.spectral_ratios) table.push_back({a, ratio, {}, 0.0, false});

    const int budget = detail::thread_budget();
    detail::parallel_for(table.size(), budget, [&](std::size_t k) {
        SweepRow& row = table[k];
        try {
            SpectralConfig sc(1.0, row.ratio, row.a);
            row.det = smallest_root(sc);
            row.omega_fd = std::sqrt(discrete_eigenvalue(sc, cfg.spectral_n));
        } catch (const SolverFailure&) {
            row.failed = true;
            row.det = SpectralResult{};
            row.det.omega1 = std::numeric_limits<double>::quiet_NaN();
            row.det.nu1 = std::numeric_limits<double>::quiet_NaN();
            row.omega_fd = std::numeric_limits<double>::quiet_NaN();
        }
    });

    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    std::ofstream os = detail::open_out(out / "sweep.csv");
    os << "a,ratio,omega1_det,omega1_fd,nu1,bound_lower,quarter_ok,unit_ok\n";
    bool claim_failed = false;
    for (const auto& row : table) {
        bool quarter = !row.failed && row.det.satisfied_quarter;
        bool unit = !row.failed && row.det.satisfied_unit;
        if (!quarter || !unit) claim_failed = true;
        os << detail::fmt_double(row.a) << ',' << detail::fmt_double(row.ratio) << ','
           << detail::fmt_double(row.det.omega1) << ',' << detail::fmt_double(row.omega_fd)
           << ',' << detail::fmt_double(row.det.nu1) << ','
           << detail::fmt_double(row.det.bound_lower) << ',' << (quarter ? 1 : 0) << ','
           << (unit ? 1 : 0) << '\n';
    }
    return claim_failed ? kExitClaim : kExitOk;
}

}  // namespace odlab
