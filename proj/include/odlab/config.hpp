#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "odlab/errors.hpp"
#include "odlab/io.hpp"

namespace odlab {

// Experiment description parsed from `key = value` text.  Every field has a
// usable default, so an empty file is a valid config.  Radii bounds of zero
// mean "derive from the grid" (8h up to a quarter of the short side).
struct ExperimentConfig {
    int nx = 128;
    int ny = 128;
    double h = 1.0 / 128.0;

    double alpha = 1.0;
    double beta = 2.0;
    double lambda = 10.0;
    std::optional<double> v0;  // defaults to half the domain area at use

    std::string datum_kind = "linear";  // linear gx gy | angular k
    double datum_gx = 1.0;
    double datum_gy = 0.0;
    double datum_k = 1.0;

    std::uint64_t seed = 1;
    int max_outer = 50;
    double pde_tol = 1e-8;
    int flip_pass_cap = 8;

    std::string init = "disk";  // disk | random | file
    std::string e_file;
    std::string u_file;
    std::string out = "out";

    std::vector<std::string> probes = {"ahlfors", "beta",    "density",  "conditionb",
                                       "excess",  "twopoint", "dichotomy"};
    int sample_stride = 4;
    double radii_min = 0.0;  // 0 = 8h
    double radii_max = 0.0;  // 0 = min(width, height) / 4

    double eps0 = 0.05;
    double c0 = 1.0;
    double eps_flat = 0.1;
    double eps_carleson = 0.05;

    std::vector<double> spectral_a = {0.1,
                                      0.5,
                                      1.0,
                                      1.5707963267948966,
                                      2.0,
                                      3.141592653589793,
                                      4.0,
                                      5.0,
                                      6.0};
    std::vector<double> spectral_ratios = {1.5, 2.0, 4.0, 10.0};
    int spectral_n = 4096;

    double resolved_v0() const { return v0 ? *v0 : 0.5 * nx * ny * h * h; }
    double resolved_radii_min() const { return radii_min > 0.0 ? radii_min : 8.0 * h; }
    double resolved_radii_max() const {
        if (radii_max > 0.0) return radii_max;
        return 0.25 * std::min(nx * h, ny * h);
    }
    bool probe_selected(const std::string& name) const {
        for (const auto& p : probes)
            if (p == name) return true;
        return false;
    }
};

namespace detail {

inline const std::set<std::string>& known_probes() {
    static const std::set<std::string> s = {"ahlfors",    "beta",     "density",
                                            "conditionb", "excess",   "twopoint",
                                            "dichotomy",  "carleson", "flat",
                                            "monotonicity", "ipp"};
    return s;
}

[[noreturn]] inline void config_fail(int line, const std::string& key, const std::string& msg) {
    throw InputError("config line " + std::to_string(line) + ", key '" + key + "': " + msg);
}

inline std::vector<std::string> config_tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline double config_double(int line, const std::string& key, const std::string& tok) {
    try {
        return parse_double(tok, key.c_str());
    } catch (const InputError&) {
        config_fail(line, key, "expected a number, got '" + tok + "'");
    }
}

inline long config_long(int line, const std::string& key, const std::string& tok) {
    try {
        return parse_long(tok, key.c_str());
    } catch (const InputError&) {
        config_fail(line, key, "expected an integer, got '" + tok + "'");
    }
}

}  // namespace detail

// Total parser: every failure names the line and key.  Unknown keys are
// rejected, duplicate keys take the last value, '#' starts a comment.
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    int alpha_line = 0, beta_line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        auto hash = s.find('#');
        if (hash != std::string::npos) s.erase(hash);
        auto tokens_all = detail::config_tokens(s);
        if (tokens_all.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            detail::config_fail(line, tokens_all[0], "expected 'key = value'");
        auto keys = detail::config_tokens(s.substr(0, eq));
        auto vals = detail::config_tokens(s.substr(eq + 1));
        if (keys.size() != 1) detail::config_fail(line, keys.empty() ? "" : keys[0],
                                                  "expected a single key before '='");
        const std::string& key = keys[0];
        auto want = [&](std::size_t n) {
            if (vals.size() != n)
                detail::config_fail(line, key,
                                    "expected " + std::to_string(n) + " value(s), got " +
                                        std::to_string(vals.size()));
        };
        auto one_double = [&]() {
            want(1);
            return detail::config_double(line, key, vals[0]);
        };
        auto one_long = [&]() {
            want(1);
            return detail::config_long(line, key, vals[0]);
        };

        if (key == "grid") {
            want(3);
            long nx = detail::config_long(line, key, vals[0]);
            long ny = detail::config_long(line, key, vals[1]);
            double h = detail::config_double(line, key, vals[2]);
            if (nx < 4 || ny < 4) detail::config_fail(line, key, "grid sides must be at least 4");
            if (!(h > 0.0)) detail::config_fail(line, key, "cell size must be positive");
            cfg.nx = static_cast<int>(nx);
            cfg.ny = static_cast<int>(ny);
            cfg.h = h;
        } else if (key == "alpha") {
            cfg.alpha = one_double();
            if (!(cfg.alpha > 0.0)) detail::config_fail(line, key, "alpha must be positive");
            alpha_line = line;
        } else if (key == "beta") {
            cfg.beta = one_double();
            if (!(cfg.beta > 0.0)) detail::config_fail(line, key, "beta must be positive");
            beta_line = line;
        } else if (key == "lambda") {
            cfg.lambda = one_double();
            if (cfg.lambda < 0.0) detail::config_fail(line, key, "lambda must be nonnegative");
        } else if (key == "v0") {
            double v = one_double();
            if (v < 0.0) detail::config_fail(line, key, "target volume must be nonnegative");
            cfg.v0 = v;
        } else if (key == "datum") {
            if (vals.empty()) detail::config_fail(line, key, "expected a datum kind");
            if (vals[0] == "linear") {
                if (vals.size() != 3)
                    detail::config_fail(line, key, "linear datum takes two gradients");
                cfg.datum_kind = "linear";
                cfg.datum_gx = detail::config_double(line, key, vals[1]);
                cfg.datum_gy = detail::config_double(line, key, vals[2]);
            } else if (vals[0] == "angular") {
                if (vals.size() != 2)
                    detail::config_fail(line, key, "angular datum takes one frequency");
                cfg.datum_kind = "angular";
                cfg.datum_k = detail::config_double(line, key, vals[1]);
            } else {
                detail::config_fail(line, key, "unknown datum kind '" + vals[0] + "'");
            }
        } else if (key == "seed") {
            long v = one_long();
            if (v < 0) detail::config_fail(line, key, "seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(v);
        } else if (key == "max_outer") {
            long v = one_long();
            if (v < 1) detail::config_fail(line, key, "need at least one outer iteration");
            cfg.max_outer = static_cast<int>(v);
        } else if (key == "pde_tol") {
            cfg.pde_tol = one_double();
            if (!(cfg.pde_tol > 0.0 && cfg.pde_tol <= 1e-3))
                detail::config_fail(line, key, "tolerance must lie in (0, 1e-3]");
        } else if (key == "flip_pass_cap") {
            long v = one_long();
            if (v < 1) detail::config_fail(line, key, "need at least one sweep");
            cfg.flip_pass_cap = static_cast<int>(v);
        } else if (key == "init") {
            want(1);
            if (vals[0] != "disk" && vals[0] != "random" && vals[0] != "file")
                detail::config_fail(line, key, "unknown initializer '" + vals[0] + "'");
            cfg.init = vals[0];
        } else if (key == "e_file") {
            want(1);
            cfg.e_file = vals[0];
        } else if (key == "u_file") {
            want(1);
            cfg.u_file = vals[0];
        } else if (key == "out") {
            want(1);
            cfg.out = vals[0];
        } else if (key == "probes") {
            if (vals.empty()) detail::config_fail(line, key, "expected at least one probe name");
            for (const auto& p : vals)
                if (!detail::known_probes().count(p))
                    detail::config_fail(line, key, "unknown probe '" + p + "'");
            cfg.probes = vals;
        } else if (key == "sample_stride") {
            long v = one_long();
            if (v < 1) detail::config_fail(line, key, "stride must be at least 1");
            cfg.sample_stride = static_cast<int>(v);
        } else if (key == "radii") {
            want(2);
            double lo = detail::config_double(line, key, vals[0]);
            double hi = detail::config_double(line, key, vals[1]);
            if (!(lo > 0.0) || !(hi >= lo))
                detail::config_fail(line, key, "expected 0 < min <= max");
            cfg.radii_min = lo;
            cfg.radii_max = hi;
        } else if (key == "eps0") {
            cfg.eps0 = one_double();
            if (!(cfg.eps0 > 0.0)) detail::config_fail(line, key, "threshold must be positive");
        } else if (key == "c0") {
            cfg.c0 = one_double();
            if (!(cfg.c0 > 0.0)) detail::config_fail(line, key, "constant must be positive");
        } else if (key == "eps_flat") {
            cfg.eps_flat = one_double();
            if (cfg.eps_flat < 0.0) detail::config_fail(line, key, "threshold must be nonnegative");
        } else if (key == "eps_carleson") {
            cfg.eps_carleson = one_double();
            if (!(cfg.eps_carleson > 0.0))
                detail::config_fail(line, key, "threshold must be positive");
        } else if (key == "spectral_a") {
            if (vals.empty()) detail::config_fail(line, key, "expected at least one angle");
            std::vector<double> a;
            for (const auto& v : vals) {
                double x = detail::config_double(line, key, v);
                if (!(x > 0.0 && x < 6.283185307179586))
                    detail::config_fail(line, key, "angles must lie in (0, 2*pi)");
                a.push_back(x);
            }
            cfg.spectral_a = a;
        } else if (key == "spectral_ratios") {
            if (vals.empty()) detail::config_fail(line, key, "expected at least one ratio");
            std::vector<double> rr;
            for (const auto& v : vals) {
                double x = detail::config_double(line, key, v);
                if (!(x >= 1.0)) detail::config_fail(line, key, "ratios must be at least 1");
                rr.push_back(x);
            }
            cfg.spectral_ratios = rr;
        } else if (key == "spectral_n") {
            long v = one_long();
            if (v < 256 || (v & (v - 1)) != 0)
                detail::config_fail(line, key, "grid size must be a power of two >= 256");
            cfg.spectral_n = static_cast<int>(v);
        } else {
            detail::config_fail(line, key, "unknown key");
        }
    }
    if (cfg.alpha > cfg.beta) {
        int where = std::max(alpha_line, beta_line);
        detail::config_fail(where == 0 ? line : where, "alpha",
                            "alpha must not exceed beta");
    }
    if (cfg.init == "file" && cfg.e_file.empty())
        detail::config_fail(line, "init", "init file requires e_file");
    return cfg;
}

}  // namespace odlab
