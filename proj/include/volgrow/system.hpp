#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "volgrow/geometry.hpp"
#include "volgrow/series.hpp"

namespace volgrow {

/// Point of the projective tangent bundle: base point plus a direction class
/// [v], stored as an angle reduced mod pi (v and -v are identified).
struct TangentPoint {
    Point2 base;
    double angle = 0.0;  // in [0, pi)
};

inline double reduce_angle_mod_pi(double a) {
    const double pi = std::numbers::pi;
    double r = std::fmod(a, pi);
    if (r < 0) r += pi;
    if (r >= pi) r -= pi;
    return r;
}

inline Vec2 unit_direction(double angle) {
    return {std::cos(angle), std::sin(angle)};
}

/// A known periodic point with both Lyapunov exponents positive.
struct PeriodicSource {
    Point2 point;
    int period = 1;
};

/// A surface diffeomorphism on the flat torus or on a planar rectangle with
/// the identity chart. Map, inverse and Jacobian are closed-form evaluators;
/// norm bounds are grid estimates (lower bounds of the true sup) cached at
/// construction.
struct SurfaceSystem {
    std::string name;
    DomainKind domain = DomainKind::torus;
    Box box;                      // meaningful for plane_box only
    double smoothness_order = 3.0;  // r > 1

    std::function<Point2(Point2)> forward;
    std::function<Point2(Point2)> inverse;
    std::function<Jacobian2(Point2)> jacobian;

    std::optional<double> known_entropy;      // nats/iteration
    std::optional<double> known_lambda_plus;  // nats/iteration
    std::vector<PeriodicSource> periodic_sources;

    double df_norm = 1.0;      // grid max of ||Df_x||
    double dfinv_norm = 1.0;   // grid max of ||Df^-1_x||

    bool in_domain(const Point2& p) const {
        if (domain == DomainKind::torus) return true;
        return box.contains(p.u, p.v);
    }

    /// One forward step by formula, torus coordinates canonicalized.
    /// No domain check: linear testbeds are evaluated outside their box by
    /// several audits (clipped lengths, Fubini lines).
    Point2 step_unchecked(const Point2& p) const { return canonical(forward(p)); }

    /// One forward step with plane_box escape detection.
    Point2 step_checked(const Point2& p, int step_index) const {
        Point2 q = step_unchecked(p);
        if (!in_domain(q)) throw escape_error(step_index);
        return q;
    }

    Point2 step_back(const Point2& p) const { return canonical(inverse(p)); }
};

/// Df^n_x as the ordered product Df_{f^{n-1}x} ... Df_x. n = 0 gives the
/// identity (empty product). Throws escape_error on plane_box systems whose
/// orbit leaves the box before the product is complete.
inline Jacobian2 cocycle_jacobian(const SurfaceSystem& sys, Point2 x, int n) {
    if (n < 0) throw std::invalid_argument("cocycle_jacobian: n must be >= 0");
    x = canonical(x);
    if (!sys.in_domain(x)) throw escape_error(0);
    Jacobian2 acc = Jacobian2::identity();
    for (int i = 0; i < n; ++i) {
        acc = sys.jacobian(x) * acc;
        if (i + 1 < n) x = sys.step_checked(x, i + 1);
    }
    return acc;
}

/// Running cocycle with the matrix kept O(1) and the magnitude in a separate
/// log scale. ||Df^n|| reaches e^n-range long before double overflow would.
struct ScaledCocycle {
    Jacobian2 m = Jacobian2::identity();
    double log_scale = 0.0;

    void accumulate(const Jacobian2& df) {
        m = df * m;
        const double s = m.max_abs_entry();
        if (s > 1e50 || (s > 0.0 && s < 1e-50)) {
            m = m * (1.0 / s);
            log_scale += std::log(s);
        }
    }
    double log_operator_norm() const { return log_scale + std::log(operator_norm(m)); }
    double log_apply_norm(Vec2 v) const { return log_scale + std::log(m.apply(v).norm()); }
};

/// Orbit walker that carries the point and the scaled cocycle together.
/// advance() moves from step k to k+1; escape policy is the caller's choice.
struct OrbitCursor {
    const SurfaceSystem* sys;
    Point2 x;
    ScaledCocycle cocycle;
    int step = 0;

    OrbitCursor(const SurfaceSystem& s, Point2 start)
        : sys(&s), x(canonical(start)) {
        if (!s.in_domain(x)) throw escape_error(0);
    }

    void advance(bool enforce_domain = true) {
        cocycle.accumulate(sys->jacobian(x));
        x = enforce_domain ? sys->step_checked(x, step + 1) : sys->step_unchecked(x);
        ++step;
    }
};

/// Canonical lift step: f(x) paired with the projective action of Df_x.
inline TangentPoint lift_step(const SurfaceSystem& sys, const TangentPoint& xv) {
    const Vec2 w = sys.jacobian(xv.base).apply(unit_direction(xv.angle));
    TangentPoint out;
    out.base = sys.step_checked(xv.base, 1);
    out.angle = reduce_angle_mod_pi(std::atan2(w.y, w.x));
    return out;
}

/// Log stretch of the direction class: log ||Df_x(v)|| for the unit v.
inline double rho(const SurfaceSystem& sys, const TangentPoint& xv) {
    return std::log(sys.jacobian(xv.base).apply(unit_direction(xv.angle)).norm());
}

/// rho minus the regularity correction (1/r) log ||Df_x||.
inline double rho_prime(const SurfaceSystem& sys, const TangentPoint& xv) {
    return rho(sys, xv) -
           std::log(operator_norm(sys.jacobian(xv.base))) / sys.smoothness_order;
}

/// b_n = (1/n) max over the grid of log ||Df^n||, extrapolated by the
/// subadditive rule (min over computed n); the 1/n fit rides along as a
/// secondary diagnostic inside the returned series.
inline GrowthSeries lambda_plus_series(const SurfaceSystem& sys,
                                       const std::vector<Point2>& sample_grid,
                                       int n_max) {
    if (sample_grid.empty())
        throw std::invalid_argument("lambda_plus_series: empty sample grid");
    if (n_max < 1) throw std::invalid_argument("lambda_plus_series: n_max must be >= 1");

    std::vector<double> best(n_max, -std::numeric_limits<double>::infinity());
    for (const auto& p : sample_grid) {
        try {
            OrbitCursor cur(sys, p);
            for (int n = 1; n <= n_max; ++n) {
                cur.advance();
                best[n - 1] = std::max(best[n - 1], cur.cocycle.log_operator_norm());
            }
        } catch (const escape_error&) {
            // grid point left a plane_box domain: contributes up to its escape
        }
    }
    std::vector<SeriesEntry> entries;
    for (int n = 1; n <= n_max; ++n)
        if (std::isfinite(best[n - 1])) entries.push_back({n, best[n - 1] / n});
    if (entries.empty())
        throw std::runtime_error("lambda_plus_series: every grid orbit escaped");
    return make_series(std::move(entries), ExtrapolationMethod::fekete_min,
                       sys.name + ":lambda_plus");
}

/// Central-difference Jacobian (min-image differences on the torus); test
/// harnesses compare it against the analytic evaluator.
inline Jacobian2 fd_jacobian(const SurfaceSystem& sys, const Point2& x, double h = 1e-6) {
    auto at = [&](double du, double dv) {
        Point2 p = x;
        p.u += du;
        p.v += dv;
        return canonical(sys.forward(canonical(p)));
    };
    const Point2 up = at(h, 0), um = at(-h, 0), vp = at(0, h), vm = at(0, -h);
    Vec2 cu, cv;
    if (sys.domain == DomainKind::torus) {
        cu = {wrap_delta(up.u - um.u), wrap_delta(up.v - um.v)};
        cv = {wrap_delta(vp.u - vm.u), wrap_delta(vp.v - vm.v)};
    } else {
        cu = {up.u - um.u, up.v - um.v};
        cv = {vp.u - vm.u, vp.v - vm.v};
    }
    return {cu.x / (2 * h), cv.x / (2 * h), cu.y / (2 * h), cv.y / (2 * h)};
}

/// Populate df_norm / dfinv_norm by a deterministic grid maximum. These are
/// lower bounds of the true suprema; density is the accuracy knob.
inline void estimate_norm_bounds(SurfaceSystem& sys, int grid_per_axis = 128) {
    double dn = 1.0, din = 1.0;
    for (int i = 0; i < grid_per_axis; ++i) {
        for (int j = 0; j < grid_per_axis; ++j) {
            Point2 p;
            p.tag = sys.domain;
            if (sys.domain == DomainKind::torus) {
                p.u = (i + 0.5) / grid_per_axis;
                p.v = (j + 0.5) / grid_per_axis;
            } else {
                p.u = sys.box.umin + (i + 0.5) * sys.box.width() / grid_per_axis;
                p.v = sys.box.vmin + (j + 0.5) * sys.box.height() / grid_per_axis;
            }
            const Jacobian2 jf = sys.jacobian(p);
            dn = std::max(dn, operator_norm(jf));
            // ||Df^-1_{f(p)}|| = 1 / (smallest singular value of Df_p)
            const double smin = min_singular_value(jf);
            if (smin > 0) din = std::max(din, 1.0 / smin);
        }
    }
    sys.df_norm = dn;
    sys.dfinv_norm = din;
}

}  // namespace volgrow
