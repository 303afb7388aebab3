#pragma once

#include <cmath>
#include <utility>

namespace odlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm2(const Vec2& a) { return a.x * a.x + a.y * a.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

// Right-hand normal of the direction a->b; for a chain walked with the set
// on its left this points away from the set.
inline Vec2 right_normal(const Vec2& a, const Vec2& b) {
    Vec2 t = b - a;
    double len = norm(t);
    if (len == 0.0) return {0.0, 0.0};
    return {t.y / len, -t.x / len};
}

struct Ball {
    Vec2 center;
    double r = 0.0;

    bool contains(const Vec2& p) const { return norm2(p - center) < r * r; }
};

// Distance from p to the closed segment [a,b].
inline double dist_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = norm2(ab);
    if (len2 == 0.0) return dist(p, a);
    double t = dot(p - a, ab) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return dist(p, a + t * ab);
}

// Signed distance from p to the infinite line through q with unit normal n,
// offset s: line = { z : <z - q, n> = s }.
inline double dist_to_offset_line(const Vec2& p, const Vec2& q, const Vec2& n, double s) {
    return std::abs(dot(p - q, n) - s);
}

}  // namespace odlab
