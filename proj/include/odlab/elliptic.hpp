#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "odlab/errors.hpp"
#include "odlab/grid.hpp"

namespace odlab {

// 0 < alpha <= beta.  The conductivity is alpha on E and beta on the
// complement.
struct PhaseCoefficients {
    double alpha = 1.0;
    double beta = 1.0;

    PhaseCoefficients() = default;
    PhaseCoefficients(double a, double b) : alpha(a), beta(b) {
        if (!(a > 0.0) || !(b > 0.0) || a > b)
            throw InputError("coefficients: need 0 < alpha <= beta");
    }

    double on(bool inside) const { return inside ? alpha : beta; }
};

inline ScalarField coefficient_field(const IndicatorSet& E, const PhaseCoefficients& c) {
    ScalarField s(E.grid);
    for (std::size_t k = 0; k < s.values.size(); ++k)
        s.values[k] = E.cells[k] ? c.alpha : c.beta;
    return s;
}

// Dirichlet trace on the domain boundary, evaluated at boundary face centers.
//  linear(gx,gy):  g(p) = gx*p.x + gy*p.y
//  angular(k):     g(p) = cos(k * theta(p)), theta measured from the domain center
//  tabulated:      one value per boundary face, in the fixed face order below.
// Face order for tabulated data: bottom row i=0..nx-1, top row i=0..nx-1,
// left column j=0..ny-1, right column j=0..ny-1 (2nx + 2ny entries).
struct BoundaryDatum {
    enum class Kind { Linear, Angular, Tabulated };
    Kind kind = Kind::Linear;
    double gx = 0.0, gy = 0.0;  // linear
    double k = 0.0;             // angular
    std::vector<double> table;  // tabulated

    static BoundaryDatum linear(double gx, double gy) {
        BoundaryDatum d;
        d.kind = Kind::Linear;
        d.gx = gx;
        d.gy = gy;
        return d;
    }
    static BoundaryDatum angular(double k) {
        BoundaryDatum d;
        d.kind = Kind::Angular;
        d.k = k;
        return d;
    }
    static BoundaryDatum tabulated(std::vector<double> values) {
        BoundaryDatum d;
        d.kind = Kind::Tabulated;
        d.table = std::move(values);
        return d;
    }
    // Build a table by evaluating fn at every boundary face center.
    static BoundaryDatum tabulate(const Grid2& g, const std::function<double(Vec2)>& fn) {
        std::vector<double> t;
        t.reserve(2 * (g.nx + g.ny));
        for (int i = 0; i < g.nx; ++i) t.push_back(fn({g.origin.x + (i + 0.5) * g.h, g.origin.y}));
        for (int i = 0; i < g.nx; ++i)
            t.push_back(fn({g.origin.x + (i + 0.5) * g.h, g.origin.y + g.ny * g.h}));
        for (int j = 0; j < g.ny; ++j) t.push_back(fn({g.origin.x, g.origin.y + (j + 0.5) * g.h}));
        for (int j = 0; j < g.ny; ++j)
            t.push_back(fn({g.origin.x + g.nx * g.h, g.origin.y + (j + 0.5) * g.h}));
        return tabulated(std::move(t));
    }

    void validate(const Grid2& g) const {
        if (kind == Kind::Tabulated &&
            table.size() != static_cast<std::size_t>(2 * (g.nx + g.ny)))
            throw InputError("datum: tabulated values must cover every boundary face");
    }

    // side: 0 bottom, 1 top, 2 left, 3 right; idx along the side.
    double face_value(const Grid2& g, int side, int idx) const {
        Vec2 p;
        switch (side) {
            case 0: p = {g.origin.x + (idx + 0.5) * g.h, g.origin.y}; break;
            case 1: p = {g.origin.x + (idx + 0.5) * g.h, g.origin.y + g.ny * g.h}; break;
            case 2: p = {g.origin.x, g.origin.y + (idx + 0.5) * g.h}; break;
            default: p = {g.origin.x + g.nx * g.h, g.origin.y + (idx + 0.5) * g.h}; break;
        }
        switch (kind) {
            case Kind::Linear: return gx * p.x + gy * p.y;
            case Kind::Angular: {
                Vec2 c{g.origin.x + 0.5 * g.nx * g.h, g.origin.y + 0.5 * g.ny * g.h};
                return std::cos(k * std::atan2(p.y - c.y, p.x - c.x));
            }
            case Kind::Tabulated: {
                std::size_t off = 0;
                if (side == 1) off = g.nx;
                if (side == 2) off = 2 * g.nx;
                if (side == 3) off = 2 * g.nx + g.ny;
                return table[off + idx];
            }
        }
        return 0.0;
    }

    std::pair<double, double> range(const Grid2& g) const {
        double lo = face_value(g, 0, 0), hi = lo;
        for (int side = 0; side < 4; ++side) {
            int n = side < 2 ? g.nx : g.ny;
            for (int idx = 0; idx < n; ++idx) {
                double v = face_value(g, side, idx);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        return {lo, hi};
    }
};

namespace detail {

// Five-diagonal SPD operator of the cell-centered scheme: interior face
// coefficients are harmonic means of the adjacent cell conductivities (exact
// for the 1D transmission problem with a face-aligned interface); boundary
// faces carry 2*sigma_cell from the half-spacing ghost value.
struct FvSystem {
    Grid2 grid;
    std::vector<double> ap, aw, ae, as, an;  // diag and (negated) neighbor couplings
    std::vector<double> rhs;

    void assemble(const IndicatorSet& E, const PhaseCoefficients& c, const BoundaryDatum& bc) {
        grid = E.grid;
        const int nx = grid.nx, ny = grid.ny;
        std::size_t n = grid.size();
        ap.assign(n, 0.0);
        aw.assign(n, 0.0);
        ae.assign(n, 0.0);
        as.assign(n, 0.0);
        an.assign(n, 0.0);
        rhs.assign(n, 0.0);
        auto sig = [&](int i, int j) { return c.on(E.at(i, j)); };
        auto harm = [](double a, double b) { return 2.0 * a * b / (a + b); };
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                std::size_t k = grid.index(i, j);
                double s = sig(i, j);
                if (i > 0) {
                    double w = harm(s, sig(i - 1, j));
                    aw[k] = w;
                    ap[k] += w;
                } else {
                    double w = 2.0 * s;
                    ap[k] += w;
                    rhs[k] += w * bc.face_value(grid, 2, j);
                }
                if (i + 1 < nx) {
                    double w = harm(s, sig(i + 1, j));
                    ae[k] = w;
                    ap[k] += w;
                } else {
                    double w = 2.0 * s;
                    ap[k] += w;
                    rhs[k] += w * bc.face_value(grid, 3, j);
                }
                if (j > 0) {
                    double w = harm(s, sig(i, j - 1));
                    as[k] = w;
                    ap[k] += w;
                } else {
                    double w = 2.0 * s;
                    ap[k] += w;
                    rhs[k] += w * bc.face_value(grid, 0, i);
                }
                if (j + 1 < ny) {
                    double w = harm(s, sig(i, j + 1));
                    an[k] = w;
                    ap[k] += w;
                } else {
                    double w = 2.0 * s;
                    ap[k] += w;
                    rhs[k] += w * bc.face_value(grid, 1, i);
                }
            }
        }
    }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const int nx = grid.nx, ny = grid.ny;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                std::size_t k = grid.index(i, j);
                double v = ap[k] * x[k];
                if (i > 0) v -= aw[k] * x[k - 1];
                if (i + 1 < nx) v -= ae[k] * x[k + 1];
                if (j > 0) v -= as[k] * x[k - nx];
                if (j + 1 < ny) v -= an[k] * x[k + nx];
                y[k] = v;
            }
        }
    }
};

// Zero-fill incomplete Cholesky of the five-diagonal operator; exists because
// the matrix is an M-matrix.  Stored as the diagonal of L plus the two strict
// lower couplings reused from the operator.
struct Ic0 {
    Grid2 grid;
    std::vector<double> d;  // L diagonal

    void factor(const FvSystem& A) {
        grid = A.grid;
        const int nx = grid.nx, ny = grid.ny;
        d.assign(grid.size(), 0.0);
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                std::size_t k = grid.index(i, j);
                double v = A.ap[k];
                if (i > 0) {
                    double l = A.aw[k] / d[k - 1];
                    v -= l * l;
                }
                if (j > 0) {
                    double l = A.as[k] / d[k - nx];
                    v -= l * l;
                }
                if (v <= 0.0) v = A.ap[k];  // safeguard, should not trigger
                d[k] = std::sqrt(v);
            }
        }
    }

    // solve L L^T z = r
    void apply(const FvSystem& A, const std::vector<double>& r, std::vector<double>& z,
               std::vector<double>& tmp) const {
        const int nx = grid.nx, ny = grid.ny;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                std::size_t k = grid.index(i, j);
                double v = r[k];
                if (i > 0) v += (A.aw[k] / d[k - 1]) * tmp[k - 1];
                if (j > 0) v += (A.as[k] / d[k - nx]) * tmp[k - nx];
                tmp[k] = v / d[k];
            }
        }
        for (int j = ny - 1; j >= 0; --j) {
            for (int i = nx - 1; i >= 0; --i) {
                std::size_t k = grid.index(i, j);
                double v = tmp[k];
                if (i + 1 < nx) v += (A.ae[k] / d[k]) * z[k + 1];
                if (j + 1 < ny) v += (A.an[k] / d[k]) * z[k + nx];
                z[k] = v / d[k];
            }
        }
    }
};

}  // namespace detail

// Solve -div(sigma grad u) = 0 with Dirichlet data on the domain boundary.
// Preconditioned conjugate gradients down to relative residual <= tol; the
// iteration cap is 50*(nx+ny), a failure carries the last relative residual.
inline ScalarField solve_dirichlet(const IndicatorSet& E, const PhaseCoefficients& coeff,
                                   const BoundaryDatum& datum, double tol = 1e-8) {
    if (!(tol > 0.0) || tol > 1e-3) throw InputError("solve: tol must lie in (0, 1e-3]");
    datum.validate(E.grid);
    detail::FvSystem A;
    A.assemble(E, coeff, datum);
    detail::Ic0 M;
    M.factor(A);

    const std::size_t n = E.grid.size();
    std::vector<double> x(n, 0.0), r(A.rhs), z(n), p(n), q(n), tmp(n);
    double bnorm = 0.0;
    for (double v : A.rhs) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    ScalarField u(E.grid);
    if (bnorm == 0.0) return u;  // zero data, zero solution

    M.apply(A, r, z, tmp);
    p = z;
    double rz = 0.0;
    for (std::size_t k = 0; k < n; ++k) rz += r[k] * z[k];
    const long cap = 50L * (E.grid.nx + E.grid.ny);
    double relres = 1.0;
    for (long it = 0; it < cap; ++it) {
        A.apply(p, q);
        double pq = 0.0;
        for (std::size_t k = 0; k < n; ++k) pq += p[k] * q[k];
        double alpha = rz / pq;
        double rnorm2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
            rnorm2 += r[k] * r[k];
        }
        relres = std::sqrt(rnorm2) / bnorm;
        if (relres <= tol) {
            u.values = std::move(x);
            return u;
        }
        M.apply(A, r, z, tmp);
        double rz_new = 0.0;
        for (std::size_t k = 0; k < n; ++k) rz_new += r[k] * z[k];
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    throw SolverFailure("solve: iteration cap reached before tolerance", relres);
}

// Cell-centered gradient: central differences inside, one-sided at the
// domain edge.  Independent of sigma, so swapping the phase of one cell
// changes the Dirichlet sum by exactly (sigma_new - sigma_old) * |grad u|^2 h^2
// at that cell.
inline void gradient_at(const ScalarField& u, int i, int j, double& gx, double& gy) {
    const Grid2& g = u.grid;
    const double h = g.h;
    if (i == 0)
        gx = (u.at(1, j) - u.at(0, j)) / h;
    else if (i == g.nx - 1)
        gx = (u.at(i, j) - u.at(i - 1, j)) / h;
    else
        gx = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * h);
    if (j == 0)
        gy = (u.at(i, 1) - u.at(i, 0)) / h;
    else if (j == g.ny - 1)
        gy = (u.at(i, j) - u.at(i, j - 1)) / h;
    else
        gy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * h);
}

inline ScalarField gradient_sq(const ScalarField& u) {
    ScalarField g2(u.grid);
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i) {
            double gx, gy;
            gradient_at(u, i, j, gx, gy);
            g2.at(i, j) = gx * gx + gy * gy;
        }
    return g2;
}

// Edge-count perimeter: h times the number of interior faces separating the
// phases.  Faces on the domain boundary never count (the perimeter is
// relative to the open domain).
inline double edge_perimeter(const IndicatorSet& E) {
    const Grid2& g = E.grid;
    long edges = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i)
            if (E.at(i, j) != E.at(i + 1, j)) ++edges;
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (E.at(i, j) != E.at(i, j + 1)) ++edges;
    return static_cast<double>(edges) * g.h;
}

struct EnergyBreakdown {
    double dirichlet = 0.0;
    double perimeter = 0.0;
    double penalty = 0.0;  // lambda * |area - v0|
    double total = 0.0;
    double area = 0.0;
};

inline EnergyBreakdown total_energy(const IndicatorSet& E, const ScalarField& u,
                                    const PhaseCoefficients& coeff, double lambda, double v0) {
    if (!E.grid.same_layout(u.grid)) throw InputError("energy: grid mismatch");
    if (lambda < 0.0) throw InputError("energy: lambda must be nonnegative");
    EnergyBreakdown b;
    const double h2 = E.grid.h * E.grid.h;
    for (int j = 0; j < E.grid.ny; ++j)
        for (int i = 0; i < E.grid.nx; ++i) {
            double gx, gy;
            gradient_at(u, i, j, gx, gy);
            b.dirichlet += coeff.on(E.at(i, j)) * (gx * gx + gy * gy) * h2;
        }
    b.perimeter = edge_perimeter(E);
    b.area = E.area();
    b.penalty = lambda * std::abs(b.area - v0);
    b.total = b.dirichlet + b.perimeter + b.penalty;
    return b;
}

// Weighted Dirichlet energy over a ball: sum of sigma |grad u|^2 h^2 over
// cells with center in B_r(x).  Requires the ball inside the domain and
// r >= 2h.
inline double local_energy(const ScalarField& u, const ScalarField& sigma, const Vec2& center,
                           double r) {
    const Grid2& g = u.grid;
    if (!g.same_layout(sigma.grid)) throw InputError("local_energy: grid mismatch");
    if (r < 2.0 * g.h) throw UnresolvedScaleError("local_energy: r below twice the cell size");
    if (!g.contains_ball(center, r))
        throw InputError("local_energy: ball must lie inside the domain");
    const double r2 = r * r;
    int i0 = std::max(0, static_cast<int>(std::floor((center.x - r - g.origin.x) / g.h)) - 1);
    int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((center.x + r - g.origin.x) / g.h)));
    int j0 = std::max(0, static_cast<int>(std::floor((center.y - r - g.origin.y) / g.h)) - 1);
    int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((center.y + r - g.origin.y) / g.h)));
    double e = 0.0;
    const double h2 = g.h * g.h;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            if (norm2(g.center(i, j) - center) >= r2) continue;
            double gx, gy;
            gradient_at(u, i, j, gx, gy);
            e += sigma.at(i, j) * (gx * gx + gy * gy) * h2;
        }
    return e;
}

// Bilinear interpolation on cell centers, clamped to the outermost centers.
inline double bilinear(const ScalarField& u, const Vec2& p) {
    const Grid2& g = u.grid;
    double fx = (p.x - g.origin.x) / g.h - 0.5;
    double fy = (p.y - g.origin.y) / g.h - 0.5;
    int i0 = static_cast<int>(std::floor(fx));
    int j0 = static_cast<int>(std::floor(fy));
    i0 = std::clamp(i0, 0, g.nx - 2);
    j0 = std::clamp(j0, 0, g.ny - 2);
    double tx = std::clamp(fx - i0, 0.0, 1.0);
    double ty = std::clamp(fy - j0, 0.0, 1.0);
    // difference form: constant data comes back bit-exact, which downstream
    // residual checks rely on
    double u00 = u.at(i0, j0);
    double dx = u.at(i0 + 1, j0) - u00;
    double dy = u.at(i0, j0 + 1) - u00;
    double dxy = u.at(i0 + 1, j0 + 1) - u.at(i0 + 1, j0) - dy;
    return u00 + tx * dx + ty * dy + tx * ty * dxy;
}

// Residuals of the two integration-by-parts identities on B_r(x):
//   res1 = | E(r) - circint sigma u du/dnu |,   res2 = | circint sigma du/dnu |.
// Circle integrals use ceil(2 pi r / h) trapezoid samples, bilinear values,
// and the one-sided inward stencil (u(p) - u(p - h nu))/h; sigma is taken
// from the cell containing the sample point.  Exact (0,0) for constant u.
inline std::pair<double, double> ipp_residuals(const ScalarField& u, const ScalarField& sigma,
                                               const Vec2& center, double r) {
    const Grid2& g = u.grid;
    if (!g.same_layout(sigma.grid)) throw InputError("ipp: grid mismatch");
    if (r < 2.0 * g.h) throw UnresolvedScaleError("ipp: r below twice the cell size");
    if (!g.contains_ball(center, r)) throw InputError("ipp: ball must lie inside the domain");
    double e = local_energy(u, sigma, center, r);
    const int m = static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / g.h));
    double i1 = 0.0, i2 = 0.0;
    for (int k = 0; k < m; ++k) {
        double th = 2.0 * std::numbers::pi * k / m;
        Vec2 nu{std::cos(th), std::sin(th)};
        Vec2 p = center + r * nu;
        double up = bilinear(u, p);
        double um = bilinear(u, p - g.h * nu);
        double dun = (up - um) / g.h;
        auto [ci, cj] = g.cell_of(p);
        double s = sigma.at(ci, cj);
        i1 += s * up * dun;
        i2 += s * dun;
    }
    const double ds = 2.0 * std::numbers::pi * r / m;
    i1 *= ds;
    i2 *= ds;
    return {std::abs(e - i1), std::abs(i2)};
}

// Scale-normalized p-energy r^(1 - 2N/p) (sum |grad u|^p h^2)^(2/p), N = 2.
// Unweighted by design: it measures the field, not the medium.
inline double normalized_dirichlet(const ScalarField& u, const Vec2& center, double r, double p) {
    const Grid2& g = u.grid;
    if (p < 1.0 || p > 2.0) throw InputError("normalized_dirichlet: p must lie in [1,2]");
    if (r < 2.0 * g.h)
        throw UnresolvedScaleError("normalized_dirichlet: r below twice the cell size");
    if (!g.contains_ball(center, r))
        throw InputError("normalized_dirichlet: ball must lie inside the domain");
    const double r2 = r * r;
    int i0 = std::max(0, static_cast<int>(std::floor((center.x - r - g.origin.x) / g.h)) - 1);
    int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((center.x + r - g.origin.x) / g.h)));
    int j0 = std::max(0, static_cast<int>(std::floor((center.y - r - g.origin.y) / g.h)) - 1);
    int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((center.y + r - g.origin.y) / g.h)));
    double s = 0.0;
    const double h2 = g.h * g.h;
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            if (norm2(g.center(i, j) - center) >= r2) continue;
            double gx, gy;
            gradient_at(u, i, j, gx, gy);
            s += std::pow(gx * gx + gy * gy, 0.5 * p) * h2;
        }
    return std::pow(r, 1.0 - 4.0 / p) * std::pow(s, 2.0 / p);
}

// Average-based reverse Hoelder ratio: avg_{B_{r/2}} |grad u|^2 over the
// square of avg_{B_r} |grad u|.  Dimensionless in both the field and the
// scale; equals 1 for affine u.  A vanishing denominator (below 1e-14 times
// the gradient scale in the ball) signals a locally degenerate field.
inline double reverse_holder_ratio(const ScalarField& u, const Vec2& center, double r) {
    const Grid2& g = u.grid;
    if (r < 4.0 * g.h)
        throw UnresolvedScaleError("reverse_holder: r below four cells (inner ball unresolved)");
    if (!g.contains_ball(center, r))
        throw InputError("reverse_holder: ball must lie inside the domain");
    const double r2 = r * r, rh2 = 0.25 * r * r;
    long n_out = 0, n_in = 0;
    double sum_sq_in = 0.0, sum_abs_out = 0.0, grad_scale = 0.0;
    int i0 = std::max(0, static_cast<int>(std::floor((center.x - r - g.origin.x) / g.h)) - 1);
    int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((center.x + r - g.origin.x) / g.h)));
    int j0 = std::max(0, static_cast<int>(std::floor((center.y - r - g.origin.y) / g.h)) - 1);
    int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((center.y + r - g.origin.y) / g.h)));
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
            double d2 = norm2(g.center(i, j) - center);
            if (d2 >= r2) continue;
            double gx, gy;
            gradient_at(u, i, j, gx, gy);
            double a = std::sqrt(gx * gx + gy * gy);
            grad_scale = std::max(grad_scale, a);
            ++n_out;
            sum_abs_out += a;
            if (d2 < rh2) {
                ++n_in;
                sum_sq_in += a * a;
            }
        }
    if (n_in == 0 || n_out == 0) throw DegenerateProbeError("reverse_holder: empty ball");
    double avg_in = sum_sq_in / static_cast<double>(n_in);
    double avg_out = sum_abs_out / static_cast<double>(n_out);
    if (avg_out <= 1e-14 * grad_scale || grad_scale == 0.0)
        throw DegenerateProbeError("reverse_holder: locally constant field");
    return avg_in / (avg_out * avg_out);
}

}  // namespace odlab
