#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace snic {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Point or vector in the plane. Points are coordinates on the universal cover.
struct Vec2 {
    double x1{};
    double x2{};

    constexpr Vec2& operator+=(Vec2 o) { x1 += o.x1; x2 += o.x2; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x1 -= o.x1; x2 -= o.x2; return *this; }
    constexpr Vec2& operator*=(double s) { x1 *= s; x2 *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x1, -a.x2}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x1, s * a.x2}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

using CoverPoint = Vec2;

constexpr double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm(Vec2 a) { return std::hypot(a.x1, a.x2); }
constexpr double max_abs(Vec2 a) { return std::max(a.x1 < 0 ? -a.x1 : a.x1, a.x2 < 0 ? -a.x2 : a.x2); }

/// Row-major 2x2 matrix.
struct Mat2 {
    double a11{}, a12{}, a21{}, a22{};

    constexpr double det() const { return a11 * a22 - a12 * a21; }
    constexpr double trace() const { return a11 + a22; }
    double frobenius() const { return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22); }

    friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
        return {m.a11 * v.x1 + m.a12 * v.x2, m.a21 * v.x1 + m.a22 * v.x2};
    }
    friend constexpr Mat2 operator*(double s, const Mat2& m) {
        return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
    }
};

/// Cycle lengths of the torus R^2 / (L1 Z x L2 Z). A non-periodic geometry describes
/// a planar field; its lengths are then only the units used for revolution counts.
struct TorusGeometry {
    double L1 = two_pi;
    double L2 = two_pi;
    bool periodic = true;

    TorusGeometry() = default;
    TorusGeometry(double l1, double l2, bool is_periodic = true) : L1(l1), L2(l2), periodic(is_periodic) {
        if (!(l1 > 0.0) || !(l2 > 0.0)) throw std::invalid_argument("TorusGeometry: cycle lengths must be positive");
    }

    static TorusGeometry plane() { return {two_pi, two_pi, false}; }

    /// Representative in [0,L1) x [0,L2); identity for planar geometry.
    Vec2 wrap(Vec2 p) const {
        if (!periodic) return p;
        return {wrap_coord(p.x1, L1), wrap_coord(p.x2, L2)};
    }

    /// Shortest displacement between the projections of a and b.
    Vec2 torus_delta(Vec2 a, Vec2 b) const {
        Vec2 d = b - a;
        if (!periodic) return d;
        d.x1 -= L1 * std::round(d.x1 / L1);
        d.x2 -= L2 * std::round(d.x2 / L2);
        return d;
    }

    double torus_distance(Vec2 a, Vec2 b) const { return norm(torus_delta(a, b)); }

    /// Revolution counts of a cover displacement.
    Vec2 revolutions(Vec2 displacement) const { return {displacement.x1 / L1, displacement.x2 / L2}; }

private:
    static double wrap_coord(double x, double L) {
        double r = std::fmod(x, L);
        if (r < 0.0) r += L;
        if (r >= L) r = 0.0;
        return r;
    }
};

}  // namespace snic
