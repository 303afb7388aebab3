#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "odlab/errors.hpp"

namespace odlab {

// Weighted circle: conductivity alpha on the arc (0,a), beta on (a, 2*pi),
// 0 < alpha < beta.  The first nontrivial eigenvalue nu1 = omega1^2 of the
// periodic problem is the smallest positive root of
//   f(omega) = -cos(2(a-pi)omega) + (C+1)cos(2 pi omega) - C,
//   C = 4 rho / (1 - rho)^2,  rho = beta/alpha.
// The equal-coefficient case is classical (nu1 = 1) and C is singular there,
// so alpha == beta is rejected.
struct SpectralConfig {
    double alpha = 1.0;
    double beta = 2.0;
    double a = std::numbers::pi;

    SpectralConfig() = default;
    SpectralConfig(double alpha_, double beta_, double a_) : alpha(alpha_), beta(beta_), a(a_) {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw InputError("spectral: coefficients must be positive");
        if (alpha > beta) throw InputError("spectral: alpha must not exceed beta");
        if (!(a > 0.0) || !(a < 2.0 * std::numbers::pi))
            throw InputError("spectral: a must lie in (0, 2*pi)");
    }

    double ratio() const { return beta / alpha; }
    double C() const {
        double rho = ratio();
        double d = 1.0 - rho;
        return 4.0 * rho / (d * d);
    }
};

inline double det_function(double omega, const SpectralConfig& cfg) {
    if (cfg.alpha == cfg.beta)
        throw InputError("det_function: equal coefficients are the classical case");
    const double C = cfg.C();
    return -std::cos(2.0 * (cfg.a - std::numbers::pi) * omega) +
           (C + 1.0) * std::cos(2.0 * std::numbers::pi * omega) - C;
}

inline double det_derivative(double omega, const SpectralConfig& cfg) {
    const double C = cfg.C();
    return 2.0 * (cfg.a - std::numbers::pi) *
               std::sin(2.0 * (cfg.a - std::numbers::pi) * omega) -
           2.0 * std::numbers::pi * (C + 1.0) * std::sin(2.0 * std::numbers::pi * omega);
}

struct SpectralResult {
    double omega1 = 0.0;
    double nu1 = 0.0;
    double bound_lower = 0.0;  // min{(pi/a)^2, (pi/(2 pi - a))^2}
    bool satisfied_quarter = false;  // nu1 > 1/4
    bool satisfied_unit = false;     // omega1 <= 1 + 1e-9
};

// Smallest positive root of the determinant on (1e-4, 1.001]: sign scan with
// step 1e-4, bisection to width 1e-12.  Roots the scan cannot bracket (f
// touches zero from below, the a = pi family) are caught as |f| < 1e-14 grid
// minima and polished by bisecting the analytic derivative, which changes
// sign transversally at a double root.
inline SpectralResult smallest_root(const SpectralConfig& cfg) {
    const double pi = std::numbers::pi;
    if (cfg.alpha == cfg.beta) {
        // classical problem, independent of a: first nontrivial eigenvalue 1
        SpectralResult r;
        r.omega1 = 1.0;
        r.nu1 = 1.0;
        double b1 = (pi / cfg.a) * (pi / cfg.a);
        double b2 = (pi / (2.0 * pi - cfg.a)) * (pi / (2.0 * pi - cfg.a));
        r.bound_lower = std::min(b1, b2);
        r.satisfied_quarter = true;
        r.satisfied_unit = true;
        return r;
    }
    const double d0 = 1e-4;
    const int steps = 10010;  // covers (0, 1.001]
    double w_prev = d0;
    double f_prev = det_function(w_prev, cfg);
    double root = -1.0;
    for (int k = 2; k <= steps && root < 0.0; ++k) {
        double w = d0 * k;
        double f = det_function(w, cfg);
        if (f_prev < 0.0 && f >= 0.0) {
            double lo = w_prev, hi = w;
            while (hi - lo > 1e-12) {
                double mid = 0.5 * (lo + hi);
                if (det_function(mid, cfg) >= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            root = 0.5 * (lo + hi);
            break;
        }
        if (std::abs(f) < 1e-14 && f_prev < 0.0) {
            // tangential root: f' changes sign across the touch point
            double lo = w_prev, hi = std::min(w + d0, d0 * steps);
            double dlo = det_derivative(lo, cfg);
            double dhi = det_derivative(hi, cfg);
            if (dlo * dhi <= 0.0) {
                for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double dm = det_derivative(mid, cfg);
                    if (dm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((dlo < 0.0) == (dm < 0.0)) {
                        lo = mid;
                        dlo = dm;
                    } else {
                        hi = mid;
                    }
                }
                root = 0.5 * (lo + hi);
                break;
            }
            root = w;  // exact grid zero without derivative sign change
            break;
        }
        w_prev = w;
        f_prev = f;
    }
    if (root < 0.0) throw SolverFailure("smallest_root: no root in (0, 1.001]", 0.0);

    SpectralResult r;
    r.omega1 = root;
    r.nu1 = root * root;
    double b1 = (pi / cfg.a) * (pi / cfg.a);
    double b2 = (pi / (2.0 * pi - cfg.a)) * (pi / (2.0 * pi - cfg.a));
    r.bound_lower = std::min(b1, b2);
    r.satisfied_quarter = r.nu1 > 0.25;
    r.satisfied_unit = r.omega1 <= 1.0 + 1e-9;
    return r;
}

// Independent cross-check: generalized eigenvalue K v = nu M v on a uniform
// periodic grid of n nodes (n >= 256, power of two).  Edge weights are exact
// harmonic integrals dt / int_edge dt/sigma and the lumped mass uses the
// exact cell average of sigma, which keeps the jump handling second order;
// away from the two jump edges both reduce to plain midpoint/node sampling.
// Inverse iteration on the shifted pencil (K + M, M) with the constant mode
// deflated in the M inner product, to relative accuracy 1e-10.
inline double discrete_eigenvalue(const SpectralConfig& cfg, int n) {
    if (n < 256 || (n & (n - 1)) != 0)
        throw InputError("discrete_eigenvalue: n must be a power of two >= 256");
    const double pi = std::numbers::pi;
    const double dt = 2.0 * pi / n;
    const double a = cfg.a, al = cfg.alpha, be = cfg.beta;

    auto inv_sigma_int = [&](double lo, double hi) {
        double in_a = std::max(0.0, std::min(hi, a) - std::min(lo, a));
        return in_a / al + (hi - lo - in_a) / be;
    };
    auto sigma_int = [&](double lo, double hi) {
        double in_a = std::max(0.0, std::min(hi, a) - std::min(lo, a));
        return in_a * al + (hi - lo - in_a) * be;
    };

    // Stiffness coupling across edge k (between nodes k and k+1) is
    // sigma_harm / dt with sigma_harm = dt / int_edge dt/sigma, so the
    // coupling collapses to 1 / int_edge dt/sigma.
    std::vector<double> wedge(n), mass(n);
    for (int k = 0; k < n; ++k) wedge[k] = 1.0 / inv_sigma_int(k * dt, (k + 1) * dt);
    for (int k = 0; k < n; ++k) {
        double lo = k * dt - 0.5 * dt, hi = k * dt + 0.5 * dt;
        double s;
        if (lo < 0.0)
            s = sigma_int(0.0, hi) + sigma_int(2.0 * pi + lo, 2.0 * pi);
        else
            s = sigma_int(lo, hi);
        mass[k] = s;  // = dt * average sigma over the node cell
    }

    // B = K + M: periodic tridiagonal, SPD.
    std::vector<double> diag(n), off(n);  // off[k] couples node k and k+1 (mod n)
    for (int k = 0; k < n; ++k) off[k] = -wedge[k];
    for (int k = 0; k < n; ++k) {
        int km = (k + n - 1) % n;
        diag[k] = wedge[k] + wedge[km] + mass[k];
    }

    // Cyclic tridiagonal solve via Sherman-Morrison on the corner coupling.
    const double corner = off[n - 1];
    std::vector<double> d2(n), rhs_u(n, 0.0);
    auto thomas = [&](std::vector<double>& x, const std::vector<double>& b,
                      const std::vector<double>& dd) {
        static thread_local std::vector<double> cp, dp;
        cp.assign(n, 0.0);
        dp.assign(n, 0.0);
        cp[0] = off[0] / dd[0];
        dp[0] = b[0] / dd[0];
        for (int k = 1; k < n - 1; ++k) {
            double m = dd[k] - off[k - 1] * cp[k - 1];
            cp[k] = off[k] / m;
            dp[k] = (b[k] - off[k - 1] * dp[k - 1]) / m;
        }
        double m = dd[n - 1] - off[n - 2] * cp[n - 2];
        dp[n - 1] = (b[n - 1] - off[n - 2] * dp[n - 2]) / m;
        x[n - 1] = dp[n - 1];
        for (int k = n - 2; k >= 0; --k) x[k] = dp[k] - cp[k] * x[k + 1];
    };
    // B = T + corner * (e_0 e_{n-1}^T + e_{n-1} e_0^T); fold into rank-one
    // update with u = gamma e_0 + corner e_{n-1} (Golub-Van Loan form).
    const double gamma = -diag[0];
    std::vector<double> dmod(diag);
    dmod[0] -= gamma;
    dmod[n - 1] -= corner * corner / gamma;
    std::vector<double> zvec(n), qvec(n), uvec(n, 0.0);
    uvec[0] = gamma;
    uvec[n - 1] = corner;
    std::vector<double> vvec(n, 0.0);
    vvec[0] = 1.0;
    vvec[n - 1] = corner / gamma;
    thomas(qvec, uvec, dmod);
    auto solveB = [&](std::vector<double>& x, const std::vector<double>& b) {
        thomas(zvec, b, dmod);
        double vz = zvec[0] + (corner / gamma) * zvec[n - 1];
        double vq = qvec[0] + (corner / gamma) * qvec[n - 1];
        double fac = vz / (1.0 + vq);
        for (int k = 0; k < n; ++k) x[k] = zvec[k] - fac * qvec[k];
    };

    double m_total = 0.0;
    for (int k = 0; k < n; ++k) m_total += mass[k];
    auto deflate = [&](std::vector<double>& v) {
        double mv = 0.0;
        for (int k = 0; k < n; ++k) mv += mass[k] * v[k];
        double c = mv / m_total;
        for (int k = 0; k < n; ++k) v[k] -= c;
    };
    auto applyK = [&](const std::vector<double>& v, std::vector<double>& y) {
        for (int k = 0; k < n; ++k) {
            int km = (k + n - 1) % n, kp = (k + 1) % n;
            y[k] = (wedge[k] + wedge[km]) * v[k] - wedge[km] * v[km] - wedge[k] * v[kp];
        }
    };

    std::vector<double> v(n), b(n), y(n);
    for (int k = 0; k < n; ++k) v[k] = std::cos(2.0 * pi * k / n) + 0.3 * std::sin(4.0 * pi * k / n);
    deflate(v);
    double nu_prev = -1.0;
    for (int it = 0; it < 100000; ++it) {
        for (int k = 0; k < n; ++k) b[k] = mass[k] * v[k];
        solveB(v, b);
        deflate(v);
        double nrm = 0.0;
        for (int k = 0; k < n; ++k) nrm = std::max(nrm, std::abs(v[k]));
        if (nrm == 0.0) throw SolverFailure("discrete_eigenvalue: iteration collapsed", 0.0);
        for (int k = 0; k < n; ++k) v[k] /= nrm;
        applyK(v, y);
        double num = 0.0, den = 0.0;
        for (int k = 0; k < n; ++k) {
            num += v[k] * y[k];
            den += mass[k] * v[k] * v[k];
        }
        double nu = num / den;
        if (nu_prev >= 0.0 && std::abs(nu - nu_prev) <= 1e-10 * std::max(nu, 1e-300)) return nu;
        nu_prev = nu;
    }
    throw SolverFailure("discrete_eigenvalue: inverse iteration did not settle", nu_prev);
}

// Empirical spectral floor over an a-grid at fixed ratio: min over the grid of
// nu1.  The grid must be dense (>= 512 points) and reach into both endpoint
// regimes; the quarter bound is checked and a violation throws.
inline double gamma_gap(double ratio, const std::vector<double>& a_grid) {
    if (a_grid.size() < 512) throw InputError("gamma_gap: a-grid must have at least 512 points");
    if (!(ratio > 1.0)) throw InputError("gamma_gap: ratio must exceed 1");
    double lo = 1e300, hi = -1e300, mn = 1e300;
    for (double a : a_grid) {
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (lo > 1e-3 + 1e-12 || hi < 2.0 * std::numbers::pi - 1e-3 - 1e-12)
        throw InputError("gamma_gap: a-grid must span [1e-3, 2*pi - 1e-3]");
    for (double a : a_grid) {
        SpectralConfig cfg(1.0, ratio, a);
        mn = std::min(mn, smallest_root(cfg).nu1);
    }
    if (!(mn > 0.25))
        throw ClaimViolation("gamma_gap: spectral floor dipped to or below 1/4");
    return mn;
}

// Trapezoid check of the circle Poincare inequality on one radius-r circle:
//   integral (u - mean)^2 ds  <=  r^2 integral (du/ds)^2 ds
// for periodic samples; the tangential derivative uses central differences.
struct WirtingerCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;  // lhs <= rhs * (1 + 1e-6) + 1e-12
};

inline WirtingerCheck wirtinger_check(const std::vector<double>& samples, double r) {
    const std::size_t n = samples.size();
    if (n < 16) throw InputError("wirtinger: need at least 16 samples");
    if (!(r > 0.0)) throw InputError("wirtinger: r must be positive");
    const double dth = 2.0 * std::numbers::pi / static_cast<double>(n);
    const double ds = r * dth;
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    WirtingerCheck c;
    for (std::size_t k = 0; k < n; ++k) {
        double d = samples[k] - mean;
        c.lhs += d * d * ds;
        double dtau = (samples[(k + 1) % n] - samples[(k + n - 1) % n]) / (2.0 * ds);
        c.rhs += dtau * dtau * ds;
    }
    c.rhs *= r * r;
    c.holds = c.lhs <= c.rhs * (1.0 + 1e-6) + 1e-12;
    return c;
}

}  // namespace odlab
