#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "odlab/errors.hpp"
#include "odlab/geometry.hpp"

namespace odlab {

// Uniform cell grid covering the rectangle [origin.x, origin.x + nx*h] x
// [origin.y, origin.y + ny*h].  Cell (i,j) has its center at
// origin + ((i+1/2)h, (j+1/2)h).  Values of every field live at cell centers.
struct Grid2 {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    Vec2 origin{0.0, 0.0};

    Grid2() = default;
    Grid2(int nx_, int ny_, double h_, Vec2 origin_ = {0.0, 0.0})
        : nx(nx_), ny(ny_), h(h_), origin(origin_) {
        if (nx < 4 || ny < 4) throw InputError("grid: nx and ny must be at least 4");
        if (!(h > 0.0)) throw InputError("grid: h must be positive");
    }

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    bool in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

    Vec2 center(int i, int j) const {
        return {origin.x + (i + 0.5) * h, origin.y + (j + 0.5) * h};
    }
    double width() const { return nx * h; }
    double height() const { return ny * h; }
    double area() const { return width() * height(); }
    double diameter() const { return std::hypot(width(), height()); }

    // Cell whose closed square contains p, clamped to the grid.
    std::pair<int, int> cell_of(const Vec2& p) const {
        int i = static_cast<int>(std::floor((p.x - origin.x) / h));
        int j = static_cast<int>(std::floor((p.y - origin.y) / h));
        i = std::clamp(i, 0, nx - 1);
        j = std::clamp(j, 0, ny - 1);
        return {i, j};
    }

    // True if the closed ball lies inside the domain rectangle.
    bool contains_ball(const Vec2& c, double r) const {
        return c.x - r >= origin.x && c.x + r <= origin.x + width() &&
               c.y - r >= origin.y && c.y + r <= origin.y + height();
    }

    // Distance from p to the domain boundary rectangle (negative outside).
    double boundary_distance(const Vec2& p) const {
        double dx = std::min(p.x - origin.x, origin.x + width() - p.x);
        double dy = std::min(p.y - origin.y, origin.y + height() - p.y);
        return std::min(dx, dy);
    }

    bool same_layout(const Grid2& o) const {
        return nx == o.nx && ny == o.ny && h == o.h && origin == o.origin;
    }
};

struct ScalarField {
    Grid2 grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid2& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }
};

// Phase-indicator on cells: true = inside E, false = complement.
struct IndicatorSet {
    Grid2 grid;
    std::vector<std::uint8_t> cells;

    IndicatorSet() = default;
    explicit IndicatorSet(const Grid2& g, bool fill = false)
        : grid(g), cells(g.size(), fill ? 1 : 0) {}

    bool at(int i, int j) const { return cells[grid.index(i, j)] != 0; }
    void set(int i, int j, bool v) { cells[grid.index(i, j)] = v ? 1 : 0; }
    void flip(int i, int j) { cells[grid.index(i, j)] ^= 1; }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto c : cells) n += c;
        return n;
    }
    double area() const { return static_cast<double>(count()) * grid.h * grid.h; }

    IndicatorSet complement() const {
        IndicatorSet out(grid);
        for (std::size_t k = 0; k < cells.size(); ++k) out.cells[k] = cells[k] ? 0 : 1;
        return out;
    }

    // True cell with at least one 4-neighbor of the opposite phase, or the
    // mirrored situation for a false cell.  Neighbors outside the grid do not
    // count.
    bool is_interface_cell(int i, int j) const {
        bool v = at(i, j);
        static constexpr int di[4] = {1, -1, 0, 0};
        static constexpr int dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            int ii = i + di[k], jj = j + dj[k];
            if (grid.in_bounds(ii, jj) && at(ii, jj) != v) return true;
        }
        return false;
    }
};

// Connected components of the true phase under 4-connectivity.  Labels are
// 1..count in order of first appearance in row-major (j outer, i inner) scan;
// 0 marks the false phase.
struct ComponentLabels {
    Grid2 grid;
    std::vector<int> labels;
    int count = 0;
    std::vector<double> areas;  // areas[k] = area of component k+1

    int at(int i, int j) const { return labels[grid.index(i, j)]; }
};

inline ComponentLabels label_components(const IndicatorSet& E) {
    ComponentLabels out;
    out.grid = E.grid;
    out.labels.assign(E.grid.size(), 0);
    std::vector<std::size_t> stack;
    const int nx = E.grid.nx, ny = E.grid.ny;
    const double cell_area = E.grid.h * E.grid.h;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            std::size_t k0 = E.grid.index(i, j);
            if (!E.cells[k0] || out.labels[k0] != 0) continue;
            ++out.count;
            std::size_t cells_in = 0;
            stack.push_back(k0);
            out.labels[k0] = out.count;
            while (!stack.empty()) {
                std::size_t k = stack.back();
                stack.pop_back();
                ++cells_in;
                int ci = static_cast<int>(k % nx), cj = static_cast<int>(k / nx);
                static constexpr int di[4] = {1, -1, 0, 0};
                static constexpr int dj[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int ii = ci + di[d], jj = cj + dj[d];
                    if (!E.grid.in_bounds(ii, jj)) continue;
                    std::size_t kk = E.grid.index(ii, jj);
                    if (E.cells[kk] && out.labels[kk] == 0) {
                        out.labels[kk] = out.count;
                        stack.push_back(kk);
                    }
                }
            }
            out.areas.push_back(static_cast<double>(cells_in) * cell_area);
        }
    }
    return out;
}

namespace detail {

// One-dimensional lower envelope of parabolas (exact squared Euclidean
// distance transform); f and d in squared lattice units.  Sources with
// f >= kInf are absent and never enter the hull.
inline void edt_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& d,
                   std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    const std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] >= kInf) continue;
        double s = 0.0;
        while (k >= 0) {
            int p = v[k];
            s = (static_cast<double>(f[q] - f[p]) + static_cast<double>(q) * q -
                 static_cast<double>(p) * p) /
                (2.0 * (q - p));
            if (s <= z[k])
                --k;
            else
                break;
        }
        ++k;
        v[k] = q;
        z[k] = (k == 0) ? -std::numeric_limits<double>::infinity() : s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), kInf);
        return;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        std::int64_t dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace detail

// Exact Euclidean distance from each cell center to the nearest true cell
// center.  True cells get 0.  An empty set yields the finite sentinel
// 2 * diameter(domain) everywhere.
inline ScalarField distance_transform(const IndicatorSet& E) {
    const Grid2& g = E.grid;
    ScalarField out(g);
    const std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
    if (E.count() == 0) {
        std::fill(out.values.begin(), out.values.end(), 2.0 * g.diameter());
        return out;
    }
    const int nx = g.nx, ny = g.ny;
    // pass 1: columns (distance along y per column)
    std::vector<std::int64_t> work(static_cast<std::size_t>(nx) * ny);
    {
        std::vector<std::int64_t> f(ny), d(ny);
        std::vector<int> v(ny);
        std::vector<double> z(ny + 1);
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) f[j] = E.at(i, j) ? 0 : kInf;
            detail::edt_1d(f, d, v, z);
            for (int j = 0; j < ny; ++j) work[g.index(i, j)] = d[j];
        }
    }
    // pass 2: rows
    {
        std::vector<std::int64_t> f(nx), d(nx);
        std::vector<int> v(nx);
        std::vector<double> z(nx + 1);
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) f[i] = work[g.index(i, j)];
            detail::edt_1d(f, d, v, z);
            for (int i = 0; i < nx; ++i)
                out.values[g.index(i, j)] = std::sqrt(static_cast<double>(d[i])) * g.h;
        }
    }
    return out;
}

// h^2-weighted counts of true/false cell centers inside B_r(center).  The two
// parts sum to the area of all cells whose center lies in the ball.
inline std::pair<double, double> ball_area(const IndicatorSet& E, const Vec2& center, double r) {
    const Grid2& g = E.grid;
    if (r < g.h) throw UnresolvedScaleError("ball_area: r below cell size");
    const double r2 = r * r;
    // restrict the scan to the bounding box of the ball
    int i0 = std::max(0, static_cast<int>(std::floor((center.x - r - g.origin.x) / g.h)) - 1);
    int i1 = std::min(g.nx - 1, static_cast<int>(std::ceil((center.x + r - g.origin.x) / g.h)));
    int j0 = std::max(0, static_cast<int>(std::floor((center.y - r - g.origin.y) / g.h)) - 1);
    int j1 = std::min(g.ny - 1, static_cast<int>(std::ceil((center.y + r - g.origin.y) / g.h)));
    std::size_t in = 0, outc = 0;
    for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
            if (norm2(g.center(i, j) - center) < r2) {
                if (E.at(i, j))
                    ++in;
                else
                    ++outc;
            }
        }
    }
    const double a = g.h * g.h;
    return {static_cast<double>(in) * a, static_cast<double>(outc) * a};
}

// min(|E cap B_r|, |B_r \ E|) / r^N with N = 2, the scale-invariant density
// of the less represented phase.
inline double phase_density(const IndicatorSet& E, const Vec2& center, double r) {
    auto [in, out] = ball_area(E, center, r);
    return std::min(in, out) / (r * r);
}

}  // namespace odlab
