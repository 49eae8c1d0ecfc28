#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "volgrow/geometry.hpp"
#include "volgrow/series.hpp"
#include "volgrow/system.hpp"

namespace volgrow {

enum class CurveProvenance { analytic, iterated };

/// Parametrized embedded curve on [0,1] with a first-derivative evaluator.
/// Higher-derivative sup norms (s = 2, 3, ...) travel alongside when the
/// curve is analytic; iterated curves carry first derivatives only (the
/// chain rule needs no map Hessians, higher orders would).
struct Curve {
    std::function<Point2(double)> position;
    std::function<Vec2(double)> derivative;
    std::vector<double> higher_deriv_bounds;  // index 0 is sup ||d^2 sigma||
    CurveProvenance provenance = CurveProvenance::analytic;
    std::string name;
};

inline Curve make_segment(Point2 a, Point2 b, std::string name = "segment") {
    Curve c;
    const Vec2 d{b.u - a.u, b.v - a.v};
    c.position = [a, d](double t) { return canonical({a.u + t * d.x, a.v + t * d.y, a.tag}); };
    c.derivative = [d](double) { return d; };
    c.higher_deriv_bounds = {0.0};
    c.name = std::move(name);
    return c;
}

inline Curve make_horizontal_loop(double v0) {
    Curve c = make_segment({0.0, v0, DomainKind::torus}, {1.0, v0, DomainKind::torus},
                           "hloop");
    return c;
}

inline Curve make_vertical_loop(double u0) {
    return make_segment({u0, 0.0, DomainKind::torus}, {u0, 1.0, DomainKind::torus}, "vloop");
}

/// f^n composed with the curve: position by orbit stepping, derivative by the
/// chain rule through the cocycle.
inline Curve iterate_curve(const SurfaceSystem& sys, const Curve& base, int n,
                           bool enforce_domain = true) {
    Curve c;
    c.provenance = CurveProvenance::iterated;
    c.name = base.name + "^" + std::to_string(n);
    c.position = [&sys, base, n, enforce_domain](double t) {
        Point2 p = canonical(base.position(t));
        for (int i = 0; i < n; ++i)
            p = enforce_domain ? sys.step_checked(p, i + 1) : sys.step_unchecked(p);
        return p;
    };
    c.derivative = [&sys, base, n, enforce_domain](double t) {
        Point2 p = canonical(base.position(t));
        Jacobian2 acc = Jacobian2::identity();
        for (int i = 0; i < n; ++i) {
            acc = sys.jacobian(p) * acc;
            p = enforce_domain ? sys.step_checked(p, i + 1) : sys.step_unchecked(p);
        }
        return acc.apply(base.derivative(t));
    };
    return c;
}

struct PolylineVertex {
    double t;
    Point2 p;
};

/// Numerical image of f^n(sigma): refined vertex list plus bookkeeping.
struct Polyline {
    std::vector<PolylineVertex> vertices;
    double tol_achieved = 0.0;
};

struct RefineOptions {
    int initial_intervals = 97;        // prime seed grid; breaks phase-locked zigzags
    double min_param_width = 1e-12;
    std::size_t max_vertices = std::size_t(1) << 22;
    double torus_chord_cap = 0.2;      // unwrap guard: no chord may exceed this
    std::optional<Box> crossing_box;   // refine chords crossing this window (clip mode)
    bool enforce_domain = true;
    bool keep_polyline = false;
};

struct ArcLengthResult {
    double length = 0.0;
    std::size_t vertices = 0;
    bool budget_exhausted = false;
    Polyline polyline;  // filled when keep_polyline is set
};

namespace detail {

struct ImageSample {
    Point2 p;
    double log_speed;  // log ||Df^n(sigma(t)) sigma'(t)||
};

inline ImageSample eval_image(const SurfaceSystem& sys, const Curve& curve, int n,
                              double t, bool enforce) {
    Point2 p = canonical(curve.position(t));
    if (!enforce && sys.domain == DomainKind::plane_box) {
        // unchecked walk still needs a starting point, nothing else
    } else if (!sys.in_domain(p)) {
        throw escape_error(0);
    }
    ScaledCocycle co;
    for (int i = 0; i < n; ++i) {
        co.accumulate(sys.jacobian(p));
        p = enforce ? sys.step_checked(p, i + 1) : sys.step_unchecked(p);
    }
    const Vec2 d = curve.derivative(t);
    double ls;
    if (n == 0) {
        ls = std::log(std::max(d.norm(), 1e-300));
    } else {
        ls = co.log_scale + std::log(std::max(co.m.apply(d).norm(), 1e-300));
    }
    return {p, ls};
}

/// Clip segment a..b against box; returns clipped length (Liang-Barsky).
inline double clip_segment_length(const Vec2& a, const Vec2& b, const Box& box) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    double t0 = 0.0, t1 = 1.0;
    auto clip = [&](double p, double q) {
        if (p == 0.0) return q >= 0.0;
        const double r = q / p;
        if (p < 0) {
            if (r > t1) return false;
            if (r > t0) t0 = r;
        } else {
            if (r < t0) return false;
            if (r < t1) t1 = r;
        }
        return true;
    };
    if (clip(-dx, a.x - box.umin) && clip(dx, box.umax - a.x) &&
        clip(-dy, a.y - box.vmin) && clip(dy, box.vmax - a.y))
        return (t1 - t0) * std::hypot(dx, dy);
    return 0.0;
}

inline bool segment_touches_box(const Vec2& a, const Vec2& b, const Box& box) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    double t0 = 0.0, t1 = 1.0;
    auto clip = [&](double p, double q) {
        if (p == 0.0) return q >= 0.0;
        const double r = q / p;
        if (p < 0) {
            if (r > t1) return false;
            if (r > t0) t0 = r;
        } else {
            if (r < t0) return false;
            if (r < t1) t1 = r;
        }
        return true;
    };
    return clip(-dx, a.x - box.umin) && clip(dx, box.umax - a.x) &&
           clip(-dy, a.y - box.vmin) && clip(dy, box.vmax - a.y);
}

}  // namespace detail

/// Arc length of the image polyline of f^n(sigma), adaptively refined.
///
/// An interval splits while the two-chord length exceeds the one-chord length
/// by a relative factor > tol. On the torus an interval additionally splits
/// while the parameter width times the image speed exceeds the chord cap,
/// which pins every chord below the wrap ambiguity scale; image speeds come
/// from the cocycle, so straight-but-wrapping images cannot alias. Intervals
/// stop splitting at min_param_width; if max_vertices is exhausted the
/// remaining intervals are accepted as-is and the result is flagged.
inline ArcLengthResult arc_length_detail(const SurfaceSystem& sys, const Curve& curve,
                                         int n, double tol,
                                         const RefineOptions& opt = {}) {
    if (!(tol > 0)) throw std::invalid_argument("arc_length: tol must be positive");
    if (n < 0) throw std::invalid_argument("arc_length: n must be >= 0");

    struct Node {
        double t0, t1;
        detail::ImageSample s0, s1;
    };

    auto eval = [&](double t) {
        return detail::eval_image(sys, curve, n, t, opt.enforce_domain);
    };
    auto chord = [&](const Point2& a, const Point2& b) { return distance(a, b); };

    const bool torus = sys.domain == DomainKind::torus;
    const double log_cap = std::log(opt.torus_chord_cap);

    ArcLengthResult res;
    std::vector<Node> stack;
    const int m = std::max(1, opt.initial_intervals);
    {
        std::vector<detail::ImageSample> seed(m + 1);
        for (int i = 0; i <= m; ++i) seed[i] = eval(double(i) / m);
        res.vertices = m + 1;
        // push right-to-left so the leftmost interval is processed first
        for (int i = m - 1; i >= 0; --i)
            stack.push_back({double(i) / m, double(i + 1) / m, seed[i], seed[i + 1]});
    }

    if (opt.keep_polyline)
        res.polyline.vertices.push_back({0.0, stack.back().s0.p});

    while (!stack.empty()) {
        Node nd = stack.back();
        stack.pop_back();
        const double width = nd.t1 - nd.t0;
        const double tm = 0.5 * (nd.t0 + nd.t1);
        bool accept = width <= opt.min_param_width || tm <= nd.t0 || tm >= nd.t1;
        detail::ImageSample sm{};
        if (!accept) {
            sm = eval(tm);
            ++res.vertices;
            const double one = chord(nd.s0.p, nd.s1.p);
            const double c1 = chord(nd.s0.p, sm.p);
            const double c2 = chord(sm.p, nd.s1.p);
            const double two = c1 + c2;
            bool split = (two - one) > tol * two;
            if (torus) {
                const double lspeed =
                    std::max(sm.log_speed, std::max(nd.s0.log_speed, nd.s1.log_speed));
                if (std::log(width) + lspeed > log_cap) split = true;
            }
            if (opt.crossing_box) {
                auto vec = [](const Point2& p) { return Vec2{p.u, p.v}; };
                if (c1 > 0.5 && detail::segment_touches_box(vec(nd.s0.p), vec(sm.p),
                                                            *opt.crossing_box))
                    split = true;
                if (c2 > 0.5 && detail::segment_touches_box(vec(sm.p), vec(nd.s1.p),
                                                            *opt.crossing_box))
                    split = true;
            }
            if (res.vertices >= opt.max_vertices) {
                res.budget_exhausted = true;
                split = false;
            }
            if (split) {
                stack.push_back({tm, nd.t1, sm, nd.s1});
                stack.push_back({nd.t0, tm, nd.s0, sm});
                continue;
            }
            res.length += two;
            if (opt.keep_polyline) {
                res.polyline.vertices.push_back({tm, sm.p});
                res.polyline.vertices.push_back({nd.t1, nd.s1.p});
            }
        } else {
            res.length += chord(nd.s0.p, nd.s1.p);
            if (opt.keep_polyline) res.polyline.vertices.push_back({nd.t1, nd.s1.p});
        }
    }
    res.polyline.tol_achieved = tol;
    return res;
}

/// Convenience wrapper: hard error when the vertex budget runs out, since a
/// partial polyline understates the length. Callers that can use partial
/// results take arc_length_detail and read the flag.
inline double arc_length(const SurfaceSystem& sys, const Curve& curve, int n, double tol,
                         const RefineOptions& opt = {}) {
    const ArcLengthResult r = arc_length_detail(sys, curve, n, tol, opt);
    if (r.budget_exhausted)
        throw std::runtime_error(
            "arc_length: refinement budget exhausted; raise max_vertices or lower n");
    return r.length;
}

/// Length of f^n(sigma) intersected with an axis-aligned box: the polyline is
/// refined as usual (plus forced refinement of long chords near the window),
/// then each chord is clipped with exact linear interpolation at crossings.
/// Plane systems only; the map is evaluated by formula without escape checks.
inline double clipped_arc_length(const SurfaceSystem& sys, const Curve& curve, int n,
                                 const Box& box, double tol, RefineOptions opt = {}) {
    if (sys.domain != DomainKind::plane_box)
        throw std::invalid_argument("clipped_arc_length: plane systems only");
    opt.enforce_domain = false;
    opt.crossing_box = box;
    opt.keep_polyline = true;
    const ArcLengthResult r = arc_length_detail(sys, curve, n, tol, opt);
    if (r.budget_exhausted)
        throw std::runtime_error(
            "clipped_arc_length: refinement budget exhausted; raise max_vertices");
    double total = 0.0;
    for (size_t i = 0; i + 1 < r.polyline.vertices.size(); ++i) {
        const Point2& a = r.polyline.vertices[i].p;
        const Point2& b = r.polyline.vertices[i + 1].p;
        total += detail::clip_segment_length({a.u, a.v}, {b.u, b.v}, box);
    }
    return total;
}

/// (1/n) log arc length per n in n_list, extrapolated with the 1/n fit.
/// Entries past a budget-exhausted horizon are dropped and the series is
/// marked unreliable.
inline GrowthSeries curve_growth_series(const SurfaceSystem& sys, const Curve& curve,
                                        const std::vector<int>& n_list, double tol,
                                        const RefineOptions& opt = {}) {
    std::vector<SeriesEntry> entries;
    bool truncated = false;
    for (int n : n_list) {
        if (n < 1) throw std::invalid_argument("curve_growth_series: n must be >= 1");
        const ArcLengthResult r = arc_length_detail(sys, curve, n, tol, opt);
        if (r.budget_exhausted) {
            truncated = true;
            break;
        }
        entries.push_back({n, std::log(std::max(r.length, 1e-300)) / n});
    }
    GrowthSeries s = make_series(std::move(entries), ExtrapolationMethod::linear_inv_n,
                                 sys.name + ":curve:" + curve.name);
    s.reliable = !truncated;
    return s;
}

// ---------------------------------------------------------------------------
// Boundedness and the decomposition into eps-bounded pieces
// ---------------------------------------------------------------------------

struct BoundednessOptions {
    int samples = 512;
    double fd_step = 1e-5;  // second-derivative fallback step (documented knob)
    double slack = 1e-9;    // relative slack absorbing evaluation roundoff
};

struct BoundednessReport {
    double sup_d1 = 0.0;      // sampled sup ||d_t sigma||
    double min_d1 = 0.0;
    double max_higher = 0.0;  // max over 2 <= s of sup ||d^s sigma||
    bool ratio_ok = false;          // max_higher <= (1/6) sup_d1
    bool flatness_ok = false;       // sup_d1 <= 2 min_d1 (consequence of ratio_ok)
};

inline BoundednessReport boundedness_report(const Curve& c,
                                            const BoundednessOptions& opt = {}) {
    BoundednessReport rep;
    double sup = 0.0, mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= opt.samples; ++i) {
        const double t = double(i) / opt.samples;
        const double s = c.derivative(t).norm();
        sup = std::max(sup, s);
        mn = std::min(mn, s);
    }
    rep.sup_d1 = sup;
    rep.min_d1 = mn;

    if (!c.higher_deriv_bounds.empty()) {
        for (double b : c.higher_deriv_bounds) rep.max_higher = std::max(rep.max_higher, b);
    } else {
        if (c.provenance == CurveProvenance::iterated)
            throw std::invalid_argument(
                "boundedness: iterated curve without higher-derivative data");
        // finite-difference second derivative (s = 2 only)
        const double h = opt.fd_step;
        double m2 = 0.0;
        for (int i = 0; i <= opt.samples; ++i) {
            double t = double(i) / opt.samples;
            t = std::min(std::max(t, h), 1.0 - h);
            const Vec2 d2 = (c.derivative(t + h) - c.derivative(t - h)) * (0.5 / h);
            m2 = std::max(m2, d2.norm());
        }
        rep.max_higher = m2;
    }
    rep.ratio_ok = rep.max_higher <= (1.0 / 6.0) * rep.sup_d1 * (1.0 + opt.slack);
    rep.flatness_ok = rep.sup_d1 <= 2.0 * rep.min_d1 * (1.0 + opt.slack);
    return rep;
}

/// Nearly straight: every higher derivative sup is at most ||d sigma|| / 6.
/// The flatness consequence (sup <= 2 pointwise) rides along as a sanity
/// check; it holds automatically for genuinely bounded curves.
inline bool is_bounded(const Curve& c, const BoundednessOptions& opt = {}) {
    const BoundednessReport rep = boundedness_report(c, opt);
    return rep.ratio_ok && rep.flatness_ok;
}

/// Bounded and short: additionally ||d sigma|| <= eps.
inline bool is_eps_bounded(const Curve& c, double eps, const BoundednessOptions& opt = {}) {
    const BoundednessReport rep = boundedness_report(c, opt);
    return rep.ratio_ok && rep.flatness_ok && rep.sup_d1 <= eps * (1.0 + opt.slack);
}

struct AdmissibilityReport {
    double cr_norm = 0.0;  // max over s >= 1 of sup ||d^s sigma||
    double min_d1 = 0.0;
    bool admissible = false;  // cr_norm <= 1 and min_d1 >= 1/2
};

inline AdmissibilityReport admissibility_report(const Curve& c, int samples = 1024) {
    AdmissibilityReport rep;
    double sup = 0.0, mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
        const double s = c.derivative(double(i) / samples).norm();
        sup = std::max(sup, s);
        mn = std::min(mn, s);
    }
    rep.cr_norm = sup;
    for (double b : c.higher_deriv_bounds) rep.cr_norm = std::max(rep.cr_norm, b);
    rep.min_d1 = mn;
    rep.admissible = rep.cr_norm <= 1.0 + 1e-9 && rep.min_d1 >= 0.5 - 1e-9;
    return rep;
}

/// Per-n maximum of arc lengths over a finite curve family, then (1/n) log.
/// Family members must meet the admissibility contract (C^r norm <= 1,
/// pointwise speed >= 1/2) unless enforcement is switched off; the relaxed
/// mode exists for experimentation and carries no accuracy claims.
inline GrowthSeries sup_curve_growth(const SurfaceSystem& sys,
                                     const std::vector<Curve>& family,
                                     const std::vector<int>& n_list, double tol,
                                     const RefineOptions& opt = {},
                                     bool enforce_admissibility = true) {
    if (family.empty()) throw std::invalid_argument("sup_curve_growth: empty family");
    if (enforce_admissibility) {
        for (const auto& c : family)
            if (!admissibility_report(c).admissible)
                throw std::invalid_argument("sup_curve_growth: curve '" + c.name +
                                            "' is not admissible");
    }
    std::vector<SeriesEntry> entries;
    bool truncated = false;
    for (int n : n_list) {
        double best = 0.0;
        for (const auto& c : family) {
            const ArcLengthResult r = arc_length_detail(sys, c, n, tol, opt);
            if (r.budget_exhausted) truncated = true;
            best = std::max(best, r.length);
        }
        if (truncated) break;
        entries.push_back({n, std::log(std::max(best, 1e-300)) / n});
    }
    GrowthSeries s = make_series(std::move(entries), ExtrapolationMethod::linear_inv_n,
                                 sys.name + ":sup_curve");
    s.reliable = !truncated;
    return s;
}

/// Affine reparametrization of a curve: t -> sigma(delta t + b). Derivative
/// bounds scale by delta^s.
inline Curve reparametrize_affine(const Curve& base, double delta, double b,
                                  std::string name) {
    Curve c;
    c.position = [base, delta, b](double t) { return base.position(delta * t + b); };
    c.derivative = [base, delta, b](double t) {
        return base.derivative(delta * t + b) * delta;
    };
    double scale = delta;
    for (double bound : base.higher_deriv_bounds) {
        scale *= delta;
        c.higher_deriv_bounds.push_back(bound * scale);
    }
    c.provenance = base.provenance;
    c.name = std::move(name);
    return c;
}

/// Split an admissible curve into exactly ceil(1/eps) eps-bounded pieces via
/// the affine maps theta_j(t) = delta t + b_j with delta = 1/N,
/// b_j = (j-1) delta for j < N and b_N = 1 - delta. The images cover the
/// whole parameter interval (the last piece overlaps its neighbour).
inline std::vector<Curve> decompose_eps_bounded(const Curve& curve, double eps) {
    if (!(eps > 0.0) || eps > 0.01 + 1e-15)
        throw std::invalid_argument("decompose_eps_bounded: need 0 < eps <= 1/100");
    const AdmissibilityReport adm = admissibility_report(curve);
    if (!adm.admissible)
        throw std::invalid_argument("decompose_eps_bounded: curve not admissible");

    const int n_pieces = int(std::ceil(1.0 / eps));
    const double delta = 1.0 / n_pieces;
    std::vector<Curve> out;
    out.reserve(n_pieces);
    for (int j = 1; j <= n_pieces; ++j) {
        const double b = (j < n_pieces) ? (j - 1) * delta : 1.0 - delta;
        out.push_back(reparametrize_affine(curve, delta, b,
                                           curve.name + "[" + std::to_string(j) + "]"));
    }
    return out;
}

}  // namespace volgrow
