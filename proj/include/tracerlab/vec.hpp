#pragma once

#include <cmath>

namespace trl {

struct Vec2 {
    double x = 0.0, y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

// Rotation by +90 degrees: J = [[0,-1],[1,0]]. The drift is b = J grad(psi);
// for any k, (J k) . k = 0, which is what makes each mode divergence-free.
constexpr Vec2 rot90(Vec2 v) { return {-v.y, v.x}; }

// Symmetric 2x2 matrix (Hessians).
struct Sym2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    constexpr Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    constexpr double frob2() const { return xx * xx + 2.0 * xy * xy + yy * yy; }
    constexpr double trace() const { return xx + yy; }
};

} // namespace trl
