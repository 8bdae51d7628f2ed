#pragma once

#include <array>
#include <cmath>

namespace vpinn {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
// rotate by +90 degrees
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// signed area of triangle (a,b,c); positive when counterclockwise
inline double signed_area(Vec2 a, Vec2 b, Vec2 c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

inline double triangle_diameter(Vec2 a, Vec2 b, Vec2 c) {
    return std::max({norm(b - a), norm(c - b), norm(a - c)});
}

inline double triangle_inradius(Vec2 a, Vec2 b, Vec2 c) {
    const double area = std::abs(signed_area(a, b, c));
    const double per = norm(b - a) + norm(c - b) + norm(a - c);
    return 2.0 * area / per;
}

// barycentric coordinates of p with respect to (a,b,c)
inline std::array<double, 3> barycentric(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
    const double inv = 1.0 / signed_area(a, b, c);
    const double l1 = signed_area(p, b, c) * inv;
    const double l2 = signed_area(a, p, c) * inv;
    return {l1, l2, 1.0 - l1 - l2};
}

}  // namespace vpinn
