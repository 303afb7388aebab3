#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "odlab/boundary.hpp"
#include "odlab/elliptic.hpp"
#include "odlab/errors.hpp"
#include "odlab/geometry.hpp"
#include "odlab/grid.hpp"

namespace odlab {

// One ball-centered measurement record, keyed by quantity name.  Values are
// dimensionless or length-normalized, so every entry must be finite and
// nonnegative, and a recorded flatness number never exceeds 2.
struct BallProbe {
    Vec2 center;
    double r = 0.0;
    std::map<std::string, double> values;

    void validate(double h) const {
        if (r < 2.0 * h) throw ClaimViolation("probe: r below twice the cell size");
        for (const auto& [k, v] : values) {
            if (!std::isfinite(v) || v < 0.0)
                throw ClaimViolation("probe: non-finite or negative value for " + k);
            if (k == "beta" && v > 2.0) throw ClaimViolation("probe: beta above 2");
        }
    }
};

// ---------------------------------------------------------------------------
// Perimeter-density profile

struct AhlforsRow {
    Vec2 point;
    double r = 0.0;
    double ratio = 0.0;
    bool skipped = false;  // radius below 4h or reaching the domain boundary
};

struct AhlforsProfile {
    std::vector<AhlforsRow> rows;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    // max(max_ratio, 1/min_ratio); NaN when every row was skipped
    double c_a = std::numeric_limits<double>::quiet_NaN();
};

// Ratio P(E; B_r(x)) / r per (x, r), measured on the extracted curve.  Radii
// below 4h or reaching past the domain boundary are kept as skipped rows so
// the report stays rectangular.
inline AhlforsProfile ahlfors_profile(const BoundaryCurve& curve, const Grid2& grid,
                                      const std::vector<Vec2>& points,
                                      const std::vector<double>& radii) {
    AhlforsProfile out;
    bool any = false;
    for (const auto& x : points) {
        double reach = grid.boundary_distance(x);
        for (double r : radii) {
            AhlforsRow row;
            row.point = x;
            row.r = r;
            if (r < 4.0 * curve.h || r >= reach) {
                row.skipped = true;
                out.rows.push_back(row);
                continue;
            }
            row.ratio = relative_perimeter(curve, x, r) / r;
            out.rows.push_back(row);
            out.min_ratio = std::min(out.min_ratio, row.ratio);
            out.max_ratio = std::max(out.max_ratio, row.ratio);
            any = true;
        }
    }
    if (any) out.c_a = std::max(out.max_ratio, 1.0 / out.min_ratio);
    return out;
}

// ---------------------------------------------------------------------------
// Bilateral flatness number

// Reusable sampling of a curve for repeated flatness probes: points densified
// to spacing h/2 with a bucket index for nearest-point queries.
struct BetaContext {
    CurveSamples samples;
    double h = 0.0;
};

inline BetaContext make_beta_context(const BoundaryCurve& curve) {
    BetaContext ctx;
    ctx.samples = densify_curve(curve, 0.5 * curve.h);
    ctx.h = curve.h;
    return ctx;
}

// min over lines P of  sup_{y in G cap B_t(x)} dist(y,P)/t
//                    + sup_{z in P cap B_t(x)} dist(z,G)/t.
// Lines run over 360 angles in [0,pi); the offset along each normal is
// optimized by a 17-point coarse scan plus 40 ternary-refinement evaluations.
// The second supremum uses 128 chord samples against the nearest densified
// curve point (the probe point x itself counts as a curve point, which pins
// the value at or below 2).  The per-angle minimum of the first term alone is
// a lower bound for that angle, so angles and offsets that cannot beat the
// running best are skipped without changing the result.  If stop_below >= 0
// the search may return early on either side of the threshold: as soon as
// some line certifies beta <= stop_below, or as soon as the per-angle spread
// bound certifies beta > stop_below for every angle at once.  The early value
// is then only guaranteed to sit on the correct side of stop_below; callers
// that threshold the result (the multiscale sum below) are unaffected.
inline double beta_number(const BetaContext& ctx, const Vec2& x, double t,
                          double stop_below = -1.0) {
    if (t < 4.0 * ctx.h) throw UnresolvedScaleError("beta: t below four cell sizes");
    std::vector<Vec2> q;  // in-ball curve points, relative to x
    const double t2 = t * t;
    for (const auto& p : ctx.samples.pts)
        if (norm2(p - x) <= t2) q.push_back(p - x);
    if (q.empty()) throw DegenerateProbeError("beta: no curve points in the ball");

    const int kAngles = 360;
    const int kChord = 128;

    // one projection pass per angle, shared by the bound checks and the
    // offset searches below
    std::array<double, 360> pmin, pmax;
    for (int ka = 0; ka < kAngles; ++ka) {
        double th = std::numbers::pi * ka / kAngles;
        Vec2 nrm{-std::sin(th), std::cos(th)};
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& v : q) {
            double p = dot(v, nrm);
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        pmin[ka] = lo;
        pmax[ka] = hi;
    }

    // no offset at angle th beats spread/(2t), so when the min of that bound
    // over all angles clears the threshold the chord sampling is skipped
    // entirely; decisively non-flat probes dominate the multiscale sums
    if (stop_below >= 0.0) {
        double floor_all = std::numeric_limits<double>::infinity();
        for (int ka = 0; ka < kAngles; ++ka)
            floor_all = std::min(floor_all, (pmax[ka] - pmin[ka]) / (2.0 * t));
        if (floor_all > stop_below) return floor_all;
    }

    // visit angles tightest spread first: the running best then collapses to
    // near its final value immediately and the bound test prunes the rest
    std::array<int, 360> order;
    for (int ka = 0; ka < kAngles; ++ka) order[ka] = ka;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return pmax[a] - pmin[a] < pmax[b] - pmin[b]; });

    auto dist_to_curve = [&](const Vec2& z) {
        return std::min(ctx.samples.nearest(z), dist(z, x));
    };

    double best = std::numeric_limits<double>::infinity();
    for (int rank = 0; rank < kAngles; ++rank) {
        int ka = order[rank];
        double th = std::numbers::pi * ka / kAngles;
        Vec2 dir{std::cos(th), std::sin(th)};
        Vec2 nrm{-dir.y, dir.x};
        double min_p = pmin[ka];
        double max_p = pmax[ka];
        // no offset at this angle can push the first term below this; later
        // angles have wider spreads still
        if ((max_p - min_p) / (2.0 * t) >= best) break;

        auto eval = [&](double c) {
            double first = std::max(max_p - c, c - min_p) / t;
            if (first >= best) return first;  // lower bound; cannot improve
            double second = 0.0;
            double c2 = c * c;
            if (c2 < t2) {
                double half = std::sqrt(t2 - c2);
                Vec2 foot = x + c * nrm;
                for (int k = 0; k < kChord; ++k) {
                    double s = -half + 2.0 * half * (k + 0.5) / kChord;
                    second = std::max(second, dist_to_curve(foot + s * dir));
                }
                second /= t;
            }
            double f = first + second;
            best = std::min(best, f);
            return f;
        };

        double lo = min_p, hi = max_p;
        double step = (hi - lo) / 16.0;
        double best_c = 0.5 * (lo + hi);
        double best_f = std::numeric_limits<double>::infinity();
        auto consider = [&](double c) {
            double f = eval(c);
            if (f < best_f) {
                best_f = f;
                best_c = c;
            }
        };
        for (int k = 0; k <= 16; ++k) consider(lo + step * k);
        consider(0.0);                // line through the probe point
        consider(0.5 * (lo + hi));    // exact minimizer of the first term
        if (step > 0.0) {
            double a = best_c - step, b = best_c + step;
            for (int it = 0; it < 20; ++it) {
                double m1 = a + (b - a) / 3.0;
                double m2 = b - (b - a) / 3.0;
                if (eval(m1) <= eval(m2))
                    b = m2;
                else
                    a = m1;
            }
            eval(0.5 * (a + b));
        }
        if (stop_below >= 0.0 && best <= stop_below) return best;
    }
    return best;
}

inline double beta_number(const BoundaryCurve& curve, const Vec2& x, double t) {
    BetaContext ctx = make_beta_context(curve);
    return beta_number(ctx, x, t);
}

// ---------------------------------------------------------------------------
// Carleson-type sum of the flatness indicator

// Discrete double sum over dyadic scales t in {r, r/2, ...} down to 8h and
// curve samples y in B_r(z) of 1{beta(y,t) > eps} * ds * ln 2, divided by r.
// The outer quadrature walks the curve at the caller's spacing; the flatness
// number itself always uses the h/2 densification held by ctx.  This overload
// lets a scan over many probe centers reuse both sample sets.
inline double carleson_sum(const BetaContext& ctx, const CurveSamples& walk, double eps,
                           const Vec2& z, double r) {
    if (r < 8.0 * ctx.h) throw UnresolvedScaleError("carleson: r below eight cell sizes");
    if (!(eps >= 0.0)) throw InputError("carleson: threshold must be nonnegative");
    const double r2 = r * r;
    std::vector<std::size_t> inside;
    for (std::size_t k = 0; k < walk.pts.size(); ++k)
        if (norm2(walk.pts[k] - z) <= r2) inside.push_back(k);
    double total = 0.0;
    const double ln2 = std::numbers::ln2;
    for (double t = r; t >= 8.0 * ctx.h; t *= 0.5)
        for (std::size_t k : inside)
            if (beta_number(ctx, walk.pts[k], t, eps) > eps) total += walk.ds[k] * ln2;
    return total / r;
}

inline double carleson_sum(const BoundaryCurve& curve, double eps, const Vec2& z, double r,
                           double spacing = 0.0) {
    if (spacing <= 0.0) spacing = curve.h;
    BetaContext ctx = make_beta_context(curve);
    CurveSamples walk = densify_curve(curve, spacing);
    return carleson_sum(ctx, walk, eps, z, r);
}

// ---------------------------------------------------------------------------
// Two-sided ball condition

struct ConditionB {
    double r = 0.0;
    double rho_in = 0.0;   // largest ball inside B_r(x) made of true cells
    double rho_out = 0.0;  // largest ball inside B_r(x) made of false cells

    // r over the smaller radius; infinite when a phase is absent in the ball
    double implied_constant() const {
        double m = std::min(rho_in, rho_out);
        return m > 0.0 ? r / m : std::numeric_limits<double>::infinity();
    }
};

// dt_to_set / dt_to_complement are the distance transforms of E and of its
// complement; passing them in lets a scan over many probe balls reuse the two
// grid sweeps.
inline ConditionB condition_b(const IndicatorSet& E, const ScalarField& dt_to_set,
                              const ScalarField& dt_to_complement, const Vec2& x, double r) {
    const Grid2& g = E.grid;
    if (!g.same_layout(dt_to_set.grid) || !g.same_layout(dt_to_complement.grid))
        throw InputError("condition_b: grid mismatch");
    if (r < 4.0 * g.h) throw UnresolvedScaleError("condition_b: r below four cell sizes");
    if (!g.contains_ball(x, r)) throw InputError("condition_b: ball must lie inside the domain");
    ConditionB out;
    out.r = r;
    const double r2 = r * r;
    int i0 = std::max(0, static_cast<int>(std::floor((x.x - r - g.origin.x) / g.h)) - 1);
    int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((x.x + r - g.origin.x) / g.h)));
    int j0 = std::max(0, static_cast<int>(std::floor((x.y - r - g.origin.y) / g.h)) - 1);
    int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((x.y + r - g.origin.y) / g.h)));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            Vec2 c = g.center(i, j);
            double d2 = norm2(c - x);
            if (d2 >= r2) continue;
            double room = r - std::sqrt(d2);
            if (E.at(i, j))
                out.rho_in = std::max(out.rho_in, std::min(dt_to_complement.at(i, j), room));
            else
                out.rho_out = std::max(out.rho_out, std::min(dt_to_set.at(i, j), room));
        }
    return out;
}

inline ConditionB condition_b(const IndicatorSet& E, const Vec2& x, double r) {
    ScalarField dt_set = distance_transform(E);
    ScalarField dt_comp = distance_transform(E.complement());
    return condition_b(E, dt_set, dt_comp, x, r);
}

// ---------------------------------------------------------------------------
// Density of the less represented phase

inline double h_density(const IndicatorSet& E, const Vec2& x, double r) {
    if (r < 2.0 * E.grid.h) throw UnresolvedScaleError("h_density: r below twice the cell size");
    return phase_density(E, x, r);
}

// ---------------------------------------------------------------------------
// Directional flatness excess

// r^{-1} min over 360 unit directions nu of the sum over segments with
// midpoint in B_r(x) of (1 - <nu_seg, nu>) length.  The sum equals
// L - <S, nu> with L the in-ball length and S the length-weighted normal
// resultant, so only the resultant is accumulated.
inline double excess(const BoundaryCurve& curve, const Vec2& x, double r) {
    if (r < 4.0 * curve.h) throw UnresolvedScaleError("excess: r below four cell sizes");
    const double r2 = r * r;
    double L = 0.0;
    Vec2 S{0.0, 0.0};
    curve.for_each_segment([&](const Vec2& a, const Vec2& b) {
        if (norm2(0.5 * (a + b) - x) >= r2) return;
        double len = dist(a, b);
        L += len;
        S = S + len * right_normal(a, b);
    });
    if (L == 0.0) throw DegenerateProbeError("excess: no curve segments in the ball");
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 360; ++k) {
        double th = 2.0 * std::numbers::pi * k / 360.0;
        best = std::min(best, L - (S.x * std::cos(th) + S.y * std::sin(th)));
    }
    return std::max(best, 0.0) / r;
}

// ---------------------------------------------------------------------------
// Porosity-style search for a flat ball

struct FlatBall {
    Vec2 y;
    double t = 0.0;
    double a = 0.0;  // achieved t / r
};

// Scans dyadic t from r down to 4h (largest first) and, per t, curve points
// y in B_r(x) from the nearest outward, for the first ball with
//   excess(y,t) + normalized_dirichlet(u,y,t,2) + lambda t <= eps.
// Balls poking out of the domain are skipped.  sigma must share u's layout;
// the score deliberately measures the bare field, the conductivity does not
// enter it.
inline std::optional<FlatBall> find_flat_ball(const BoundaryCurve& curve, const ScalarField& u,
                                              const ScalarField& sigma, const Vec2& x, double r,
                                              double eps, double lambda) {
    const Grid2& g = u.grid;
    if (!g.same_layout(sigma.grid)) throw InputError("find_flat_ball: grid mismatch");
    if (r < 16.0 * curve.h) throw UnresolvedScaleError("find_flat_ball: r below 16 cell sizes");
    struct Cand {
        double d;
        Vec2 y;
    };
    std::vector<Cand> cand;
    cand.push_back({0.0, x});
    const double r2 = r * r;
    for (const auto& ch : curve.chains)
        for (const auto& p : ch.pts) {
            double d2 = norm2(p - x);
            if (d2 <= r2) cand.push_back({std::sqrt(d2), p});
        }
    std::sort(cand.begin(), cand.end(), [](const Cand& a, const Cand& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.y.x != b.y.x) return a.y.x < b.y.x;
        return a.y.y < b.y.y;
    });
    for (double t = r; t >= 4.0 * curve.h; t *= 0.5)
        for (const auto& c : cand) {
            if (!g.contains_ball(c.y, t)) continue;
            double score = excess(curve, c.y, t) + normalized_dirichlet(u, c.y, t, 2.0) +
                           lambda * t;
            if (score <= eps) return FlatBall{c.y, t, t / r};
        }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scaled-energy monotonicity

struct MonotoneRow {
    double r = 0.0;
    double energy = 0.0;      // weighted Dirichlet energy over B_r
    double normalized = 0.0;  // r^{-gamma} energy
};

struct MonotoneProfile {
    double gamma = 0.0;  // 2 sqrt(alpha/beta)
    std::vector<MonotoneRow> rows;
    // index k records a relative drop > tol from rows[k] to rows[k+1]
    std::vector<std::size_t> violations;
};

inline MonotoneProfile monotonicity_profile(const ScalarField& u, const ScalarField& sigma,
                                            const PhaseCoefficients& coeff, const Vec2& x,
                                            const std::vector<double>& radii,
                                            double tol = 1e-2) {
    for (std::size_t k = 1; k < radii.size(); ++k)
        if (!(radii[k] > radii[k - 1]))
            throw InputError("monotonicity: radii must be strictly increasing");
    MonotoneProfile out;
    out.gamma = 2.0 * std::sqrt(coeff.alpha / coeff.beta);
    for (double r : radii) {
        MonotoneRow row;
        row.r = r;
        row.energy = local_energy(u, sigma, x, r);
        row.normalized = std::pow(r, -out.gamma) * row.energy;
        out.rows.push_back(row);
    }
    for (std::size_t k = 0; k + 1 < out.rows.size(); ++k)
        if (out.rows[k + 1].normalized < out.rows[k].normalized * (1.0 - tol))
            out.violations.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------
// Circle crossing counts

struct TwoPointReport {
    std::vector<std::pair<double, int>> per_radius;  // (s, crossing count)
    int max_crossings = 0;
};

// Counts transversal intersections of the polyline with each circle
// boundary: sign changes of |p - y| - s along every chain, wrapping on
// closed chains.  Exact zeros count with the nonpositive side.
inline TwoPointReport circle_two_point_test(const BoundaryCurve& curve, const Vec2& y,
                                            const std::vector<double>& s_list) {
    TwoPointReport out;
    for (double s : s_list) {
        int count = 0;
        for (const auto& ch : curve.chains) {
            std::size_t m = ch.segment_count();
            if (m == 0) continue;
            for (std::size_t k = 0; k < m; ++k) {
                double ga = dist(ch.pts[k], y) - s;
                double gb = dist(ch.pts[(k + 1) % ch.pts.size()], y) - s;
                if ((ga > 0.0) != (gb > 0.0)) ++count;
            }
        }
        out.per_radius.emplace_back(s, count);
        out.max_crossings = std::max(out.max_crossings, count);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Component separation dichotomy

struct DichotomyPair {
    int i = 0;
    int j = 0;
    double dist = 0.0;
    double min_area = 0.0;
    bool passes_far = false;    // dist >= eps0
    bool passes_quant = false;  // dist^2 >= c0 * min_area
};

struct DichotomyReport {
    int components = 0;
    std::vector<double> areas;
    std::vector<DichotomyPair> pairs;  // each unordered pair once, i < j
};

// Pairwise minimal cell-center distances between components, each pair
// evaluated against both separation predicates.  Fewer than two components
// yields an empty pair list.
inline DichotomyReport component_dichotomy(const IndicatorSet& E, double eps0, double c0) {
    ComponentLabels labels = label_components(E);
    DichotomyReport out;
    out.components = labels.count;
    out.areas = labels.areas;
    if (labels.count < 2) return out;
    const Grid2& g = E.grid;
    std::vector<std::vector<double>> d(labels.count + 1,
                                       std::vector<double>(labels.count + 1,
                                                           std::numeric_limits<double>::infinity()));
    for (int i = 1; i < labels.count; ++i) {
        IndicatorSet mask(g);
        for (std::size_t k = 0; k < mask.cells.size(); ++k)
            mask.cells[k] = labels.labels[k] == i ? 1 : 0;
        ScalarField dt = distance_transform(mask);
        for (std::size_t k = 0; k < mask.cells.size(); ++k) {
            int m = labels.labels[k];
            if (m > i) d[i][m] = std::min(d[i][m], dt.values[k]);
        }
    }
    for (int i = 1; i <= labels.count; ++i)
        for (int j = i + 1; j <= labels.count; ++j) {
            DichotomyPair p;
            p.i = i;
            p.j = j;
            p.dist = d[i][j];
            p.min_area = std::min(labels.areas[i - 1], labels.areas[j - 1]);
            p.passes_far = p.dist >= eps0;
            p.passes_quant = p.dist * p.dist >= c0 * p.min_area;
            out.pairs.push_back(p);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Mass near a component

struct NeighborhoodMass {
    double nearby_area = 0.0;    // area of E minus the component within reach
    double component_area = 0.0;
};

// Area of the rest of E within distance c2 * sqrt(|component|) of the given
// component (cell-center distances).
inline NeighborhoodMass larsen_neighborhood(const IndicatorSet& E, const ComponentLabels& labels,
                                            int comp, double c2) {
    if (!E.grid.same_layout(labels.grid)) throw InputError("neighborhood: grid mismatch");
    if (comp < 1 || comp > labels.count) throw InputError("neighborhood: no such component");
    NeighborhoodMass out;
    out.component_area = labels.areas[comp - 1];
    IndicatorSet mask(E.grid);
    for (std::size_t k = 0; k < mask.cells.size(); ++k)
        mask.cells[k] = labels.labels[k] == comp ? 1 : 0;
    ScalarField dt = distance_transform(mask);
    const double reach = c2 * std::sqrt(out.component_area);
    const double h2 = E.grid.h * E.grid.h;
    for (std::size_t k = 0; k < mask.cells.size(); ++k)
        if (E.cells[k] && labels.labels[k] != comp && dt.values[k] <= reach)
            out.nearby_area += h2;
    return out;
}

// ---------------------------------------------------------------------------
// Chord-arc height bound

struct HeightBound {
    double deviation = 0.0;  // max vertex distance to the endpoint chord
    double bound = 0.0;      // sqrt(len (len - chord) / 2)
    bool holds = false;
};

inline HeightBound height_bound_check(const std::vector<Vec2>& polyline) {
    if (polyline.size() < 2) throw InputError("height_bound: need at least 2 vertices");
    double len = 0.0;
    for (std::size_t k = 0; k + 1 < polyline.size(); ++k)
        len += dist(polyline[k], polyline[k + 1]);
    const Vec2& z0 = polyline.front();
    const Vec2& z1 = polyline.back();
    HeightBound out;
    out.bound = std::sqrt(std::max(0.0, len * (len - dist(z0, z1)) / 2.0));
    for (const auto& p : polyline)
        out.deviation = std::max(out.deviation, dist_to_segment(p, z0, z1));
    out.holds = out.deviation <= out.bound + 1e-12;
    return out;
}

// ---------------------------------------------------------------------------
// Strip confinement around a sphere-touching direction

struct StripFit {
    Vec2 direction{0.0, 0.0};  // unit vector toward the sphere-touching point
    double half_width = 0.0;   // max |<p - center, direction-perp>|
    bool contained = false;    // half_width <= 3 eta r
};

// Takes the first point lying on the sphere (within boundary_tol), aligns a
// strip through the center with it, and measures how far the point set
// sticks out sideways.
inline StripFit rectangle_confinement(const std::vector<Vec2>& points, const Ball& ball,
                                      double eta, double boundary_tol) {
    const Vec2* z0 = nullptr;
    for (const auto& p : points)
        if (std::abs(dist(p, ball.center) - ball.r) <= boundary_tol) {
            z0 = &p;
            break;
        }
    if (z0 == nullptr)
        throw InputError("confinement: no point on the sphere within tolerance");
    StripFit out;
    out.direction = (1.0 / dist(*z0, ball.center)) * (*z0 - ball.center);
    Vec2 perp{-out.direction.y, out.direction.x};
    for (const auto& p : points)
        out.half_width = std::max(out.half_width, std::abs(dot(p - ball.center, perp)));
    out.contained = out.half_width <= 3.0 * eta * ball.r;
    return out;
}

}  // namespace odlab
