#pragma once

#include <cmath>
#include <ostream>

namespace cfm {

struct Vec2 {
    double x{};
    double y{};

    constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const noexcept { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const noexcept { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const noexcept = default;
};

constexpr Vec2 operator*(double s, Vec2 v) noexcept { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
/// Counterclockwise quarter turn.
constexpr Vec2 perp(Vec2 a) noexcept { return {-a.y, a.x}; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
constexpr double norm2(Vec2 a) noexcept { return a.x * a.x + a.y * a.y; }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }
inline Vec2 normalized(Vec2 a) noexcept {
    const double n = norm(a);
    return n > 0.0 ? a / n : Vec2{};
}

/// Twice the signed area of (a, b, c); positive when counterclockwise.
constexpr double orient(Vec2 a, Vec2 b, Vec2 c) noexcept { return cross(b - a, c - a); }

inline std::ostream& operator<<(std::ostream& os, Vec2 v) {
    return os << '(' << v.x << ", " << v.y << ')';
}

struct BBox {
    Vec2 lo{1e300, 1e300};
    Vec2 hi{-1e300, -1e300};

    void add(Vec2 p) noexcept {
        lo.x = std::fmin(lo.x, p.x);
        lo.y = std::fmin(lo.y, p.y);
        hi.x = std::fmax(hi.x, p.x);
        hi.y = std::fmax(hi.y, p.y);
    }
    [[nodiscard]] double diameter() const noexcept { return norm(hi - lo); }
    [[nodiscard]] Vec2 center() const noexcept { return (lo + hi) * 0.5; }
    [[nodiscard]] bool contains(Vec2 p, double pad = 0.0) const noexcept {
        return p.x >= lo.x - pad && p.x <= hi.x + pad && p.y >= lo.y - pad && p.y <= hi.y + pad;
    }
};

}  // namespace cfm
