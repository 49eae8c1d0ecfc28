#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace volgrow {

enum class DomainKind { torus, plane_box };

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Axis-aligned rectangle used both as plane_box domain and as clip window.
struct Box {
    double umin = 0.0, umax = 1.0;
    double vmin = 0.0, vmax = 1.0;

    bool contains(double u, double v) const {
        return u >= umin && u <= umax && v >= vmin && v <= vmax;
    }
    double width() const { return umax - umin; }
    double height() const { return vmax - vmin; }
    double area() const { return width() * height(); }
};

/// Chart point. Torus coordinates are kept canonical in [0,1)^2.
struct Point2 {
    double u = 0.0;
    double v = 0.0;
    DomainKind tag = DomainKind::torus;
};

inline double wrap_unit(double x) {
    double y = x - std::floor(x);
    // floor can leave exactly 1.0 for tiny negative x
    if (y >= 1.0) y -= 1.0;
    return y;
}

inline Point2 canonical(Point2 p) {
    if (p.tag == DomainKind::torus) {
        p.u = wrap_unit(p.u);
        p.v = wrap_unit(p.v);
    }
    return p;
}

/// Signed minimal representative of a displacement on the torus: in [-1/2, 1/2).
inline double wrap_delta(double d) {
    double y = d - std::round(d);
    if (y >= 0.5) y -= 1.0;
    if (y < -0.5) y += 1.0;
    return y;
}

/// Displacement b - a, minimal-image on the torus, plain difference on the plane.
inline Vec2 displacement(const Point2& a, const Point2& b) {
    if (a.tag == DomainKind::torus)
        return {wrap_delta(b.u - a.u), wrap_delta(b.v - a.v)};
    return {b.u - a.u, b.v - a.v};
}

inline double distance(const Point2& a, const Point2& b) {
    return displacement(a, b).norm();
}

/// 2x2 real matrix, row-major: [[a, b], [c, d]].
struct Jacobian2 {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    static Jacobian2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    double det() const { return a * d - b * c; }

    Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    Jacobian2 operator*(const Jacobian2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Jacobian2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

    double max_abs_entry() const {
        return std::max(std::max(std::fabs(a), std::fabs(b)),
                        std::max(std::fabs(c), std::fabs(d)));
    }
};

namespace detail {

// singular values squared are the eigenvalues of J^T J; callers must keep
// entries in a range where t^2 cannot overflow
inline double sv_max_raw(const Jacobian2& j) {
    const double t = j.a * j.a + j.b * j.b + j.c * j.c + j.d * j.d;
    const double dt = j.det();
    const double disc = t * t - 4.0 * dt * dt;
    return std::sqrt(0.5 * (t + std::sqrt(std::max(0.0, disc))));
}

inline double sv_min_raw(const Jacobian2& j) {
    const double t = j.a * j.a + j.b * j.b + j.c * j.c + j.d * j.d;
    const double dt = j.det();
    const double disc = t * t - 4.0 * dt * dt;
    return std::sqrt(std::max(0.0, 0.5 * (t - std::sqrt(std::max(0.0, disc)))));
}

}  // namespace detail

/// Largest singular value (operator norm w.r.t. the Euclidean metric).
/// Scale-safe: entries of any magnitude are factored out first.
inline double operator_norm(const Jacobian2& j) {
    const double s = j.max_abs_entry();
    if (s == 0.0) return 0.0;
    if (s > 1e70 || s < 1e-70) return s * detail::sv_max_raw(j * (1.0 / s));
    return detail::sv_max_raw(j);
}

/// Smallest singular value.
inline double min_singular_value(const Jacobian2& j) {
    const double s = j.max_abs_entry();
    if (s == 0.0) return 0.0;
    if (s > 1e70 || s < 1e-70) return s * detail::sv_min_raw(j * (1.0 / s));
    return detail::sv_min_raw(j);
}

/// Thrown when an orbit leaves a plane_box domain; records the offending step.
struct escape_error : std::runtime_error {
    int step;
    explicit escape_error(int step_)
        : std::runtime_error("orbit left the domain at step " + std::to_string(step_)),
          step(step_) {}
};

}  // namespace volgrow
