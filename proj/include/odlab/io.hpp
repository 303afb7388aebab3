#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "odlab/boundary.hpp"
#include "odlab/errors.hpp"
#include "odlab/grid.hpp"

namespace odlab {

// All text formats use '.' as decimal separator and LF line endings,
// independent of locale.  Doubles are written with 17 significant digits so
// a round trip is value-exact.

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& tok, const char* what) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw InputError(std::string("expected a number for ") + what + ", got '" + tok + "'");
    return v;
}

inline long parse_long(const std::string& tok, const char* what) {
    char* end = nullptr;
    long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
        throw InputError(std::string("expected an integer for ") + what + ", got '" + tok + "'");
    return v;
}

}  // namespace detail

// ---- indicator text format ----------------------------------------------
// line 1: nx ny h ox oy
// then ny rows of nx characters '0'/'1', top row (j = ny-1) first.

inline void write_indicator_text(const IndicatorSet& E, std::ostream& os) {
    const Grid2& g = E.grid;
    os << g.nx << ' ' << g.ny << ' ' << detail::fmt_double(g.h) << ' '
       << detail::fmt_double(g.origin.x) << ' ' << detail::fmt_double(g.origin.y) << '\n';
    for (int j = g.ny - 1; j >= 0; --j) {
        for (int i = 0; i < g.nx; ++i) os << (E.at(i, j) ? '1' : '0');
        os << '\n';
    }
}

inline void write_indicator_text(const IndicatorSet& E, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + path);
    write_indicator_text(E, os);
}

inline IndicatorSet read_indicator_text(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw InputError("indicator: missing header line");
    std::istringstream hs(header);
    long nx, ny;
    double h, ox, oy;
    std::string t1, t2, t3, t4, t5;
    if (!(hs >> t1 >> t2 >> t3 >> t4 >> t5))
        throw InputError("indicator: header must be 'nx ny h ox oy'");
    nx = detail::parse_long(t1, "nx");
    ny = detail::parse_long(t2, "ny");
    h = detail::parse_double(t3, "h");
    ox = detail::parse_double(t4, "ox");
    oy = detail::parse_double(t5, "oy");
    IndicatorSet E(Grid2(static_cast<int>(nx), static_cast<int>(ny), h, {ox, oy}));
    for (int j = static_cast<int>(ny) - 1; j >= 0; --j) {
        std::string row;
        if (!std::getline(is, row)) throw InputError("indicator: truncated grid body");
        if (!row.empty() && row.back() == '\r') row.pop_back();
        if (static_cast<long>(row.size()) != nx)
            throw InputError("indicator: row has wrong width");
        for (long i = 0; i < nx; ++i) {
            if (row[i] == '1')
                E.set(static_cast<int>(i), j, true);
            else if (row[i] != '0')
                throw InputError("indicator: rows must contain only '0' and '1'");
        }
    }
    return E;
}

inline IndicatorSet read_indicator_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open: " + path);
    return read_indicator_text(is);
}

// ---- binary PGM (P5, maxval 255) -----------------------------------------
// 255 = inside, 0 = outside.  Top image row is the top grid row (j = ny-1).
// Grid geometry (h, origin) is not representable in PGM; reading yields a
// unit-square-scaled grid with h = 1/max(nx,ny) unless overridden.

inline void write_indicator_pgm(const IndicatorSet& E, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + path);
    const Grid2& g = E.grid;
    os << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
    std::vector<unsigned char> row(g.nx);
    for (int j = g.ny - 1; j >= 0; --j) {
        for (int i = 0; i < g.nx; ++i) row[i] = E.at(i, j) ? 255 : 0;
        os.write(reinterpret_cast<const char*>(row.data()), g.nx);
    }
}

inline IndicatorSet read_indicator_pgm(const std::string& path, double h = 0.0,
                                       Vec2 origin = {0.0, 0.0}) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open: " + path);
    auto next_token = [&]() -> std::string {
        std::string tok;
        int c;
        while ((c = is.get()) != EOF) {
            if (c == '#') {
                while ((c = is.get()) != EOF && c != '\n') {
                }
                continue;
            }
            if (std::isspace(c)) {
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(c));
        }
        return tok;
    };
    if (next_token() != "P5") throw InputError("pgm: not a binary P5 file: " + path);
    long nx = detail::parse_long(next_token(), "pgm width");
    long ny = detail::parse_long(next_token(), "pgm height");
    long maxval = detail::parse_long(next_token(), "pgm maxval");
    if (maxval != 255) throw InputError("pgm: maxval must be 255");
    if (h <= 0.0) h = 1.0 / static_cast<double>(std::max(nx, ny));
    IndicatorSet E(Grid2(static_cast<int>(nx), static_cast<int>(ny), h, origin));
    std::vector<unsigned char> row(nx);
    for (int j = static_cast<int>(ny) - 1; j >= 0; --j) {
        is.read(reinterpret_cast<char*>(row.data()), nx);
        if (is.gcount() != nx) throw InputError("pgm: truncated pixel data");
        for (long i = 0; i < nx; ++i) E.set(static_cast<int>(i), j, row[i] >= 128);
    }
    return E;
}

// ---- scalar field ---------------------------------------------------------
// CSV: header i,j,value; one row per cell, i inner.
// Raw: little-endian f64 header nx,ny,h,ox,oy then nx*ny values, i inner.

inline void write_field_csv(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + path);
    os << "i,j,value\n";
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i)
            os << i << ',' << j << ',' << detail::fmt_double(f.at(i, j)) << '\n';
}

inline void write_field_f64(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + path);
    double header[5] = {static_cast<double>(f.grid.nx), static_cast<double>(f.grid.ny),
                        f.grid.h, f.grid.origin.x, f.grid.origin.y};
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

inline ScalarField read_field_f64(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open: " + path);
    double header[5];
    is.read(reinterpret_cast<char*>(header), sizeof header);
    if (is.gcount() != sizeof header) throw InputError("field: truncated header");
    Grid2 g(static_cast<int>(header[0]), static_cast<int>(header[1]), header[2],
            {header[3], header[4]});
    ScalarField f(g);
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != f.values.size() * sizeof(double))
        throw InputError("field: truncated values");
    return f;
}

// ---- boundary curve CSV ---------------------------------------------------
// header loop_id,vertex_id,x,y; loops in extraction order, vertices in walk
// order.  Open chains are listed the same way; closedness is not encoded.

inline void write_curve_csv(const BoundaryCurve& curve, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + path);
    os << "loop_id,vertex_id,x,y\n";
    int loop = 0;
    for (const auto& ch : curve.chains) {
        int vid = 0;
        for (const auto& p : ch.pts)
            os << loop << ',' << vid++ << ',' << detail::fmt_double(p.x) << ','
               << detail::fmt_double(p.y) << '\n';
        ++loop;
    }
}

}  // namespace odlab
