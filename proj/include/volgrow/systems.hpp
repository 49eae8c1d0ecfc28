#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "volgrow/system.hpp"

namespace volgrow {

/// Torus map x -> Mx mod 1 for an integer matrix with det = +-1. Constant
/// Jacobian; entropy is log of the spectral radius (0 when the radius is 1).
inline SurfaceSystem make_toral_automorphism(int m11, int m12, int m21, int m22) {
    const int det = m11 * m22 - m12 * m21;
    if (det != 1 && det != -1)
        throw std::invalid_argument("make_toral_automorphism: |det| must be 1");

    const Jacobian2 M{double(m11), double(m12), double(m21), double(m22)};
    // spectral radius of the 2x2 integer matrix
    const double tr = M.a + M.d;
    const double disc = tr * tr - 4.0 * M.det();
    double radius;
    if (disc >= 0) {
        const double s = std::sqrt(disc);
        radius = std::max(std::fabs((tr + s) / 2), std::fabs((tr - s) / 2));
    } else {
        radius = std::sqrt(std::fabs(M.det()));  // complex pair, |lambda| = sqrt|det|
    }

    SurfaceSystem sys;
    sys.name = "toral(" + std::to_string(m11) + "," + std::to_string(m12) + "," +
               std::to_string(m21) + "," + std::to_string(m22) + ")";
    sys.domain = DomainKind::torus;
    sys.forward = [M](Point2 p) {
        return canonical({M.a * p.u + M.b * p.v, M.c * p.u + M.d * p.v, DomainKind::torus});
    };
    const double ia = m22 / double(det), ib = -m12 / double(det);
    const double ic = -m21 / double(det), id = m11 / double(det);
    sys.inverse = [=](Point2 p) {
        return canonical({ia * p.u + ib * p.v, ic * p.u + id * p.v, DomainKind::torus});
    };
    sys.jacobian = [M](Point2) { return M; };
    sys.known_entropy = radius > 1.0 ? std::log(radius) : 0.0;
    sys.known_lambda_plus = radius > 1.0 ? std::log(radius) : 0.0;
    sys.df_norm = operator_norm(M);
    const Jacobian2 Minv{ia, ib, ic, id};
    sys.dfinv_norm = operator_norm(Minv);
    return sys;
}

inline SurfaceSystem make_cat_map() {
    SurfaceSystem sys = make_toral_automorphism(2, 1, 1, 1);
    sys.name = "cat";
    return sys;
}

inline SurfaceSystem make_identity_map() {
    SurfaceSystem sys = make_toral_automorphism(1, 0, 0, 1);
    sys.name = "identity";
    return sys;
}

/// Planar linear map (u,v) -> (a u, 3 v) on the box [-2,2]^2 with the origin
/// as a fixed source. The box is not invariant; escape detection is left to
/// the callers that want it.
inline SurfaceSystem make_diag_linear(double a) {
    if (!(a > 1.0)) throw std::invalid_argument("make_diag_linear: need a > 1");
    SurfaceSystem sys;
    sys.name = "diag(" + std::to_string(a) + ",3)";
    sys.domain = DomainKind::plane_box;
    sys.box = {-2.0, 2.0, -2.0, 2.0};
    sys.forward = [a](Point2 p) { return Point2{a * p.u, 3.0 * p.v, DomainKind::plane_box}; };
    sys.inverse = [a](Point2 p) { return Point2{p.u / a, p.v / 3.0, DomainKind::plane_box}; };
    sys.jacobian = [a](Point2) { return Jacobian2{a, 0.0, 0.0, 3.0}; };
    sys.periodic_sources.push_back({Point2{0.0, 0.0, DomainKind::plane_box}, 1});
    sys.known_lambda_plus = std::log(std::max(a, 3.0));
    sys.df_norm = std::max(a, 3.0);
    sys.dfinv_norm = 1.0 / std::min(a, 3.0);
    return sys;
}

/// Chirikov standard map on the torus,
///   (u,v) -> (u + v + (k/2pi) sin(2pi u), v + (k/2pi) sin(2pi u)) mod 1.
/// Area preserving; no closed-form entropy for k > 0.
inline SurfaceSystem make_standard_map(double k) {
    if (k < 0) throw std::invalid_argument("make_standard_map: need k >= 0");
    const double twopi = 2.0 * std::numbers::pi;
    SurfaceSystem sys;
    sys.name = "standard(k=" + std::to_string(k) + ")";
    sys.domain = DomainKind::torus;
    sys.forward = [=](Point2 p) {
        const double kick = (k / twopi) * std::sin(twopi * p.u);
        return canonical({p.u + p.v + kick, p.v + kick, DomainKind::torus});
    };
    sys.inverse = [=](Point2 p) {
        const double u = p.u - p.v;  // v' = v + kick, u' = u + v'
        const double kick = (k / twopi) * std::sin(twopi * u);
        return canonical({u, p.v - kick, DomainKind::torus});
    };
    sys.jacobian = [=](Point2 p) {
        const double c = k * std::cos(twopi * p.u);
        return Jacobian2{1.0 + c, 1.0, c, 1.0};
    };
    estimate_norm_bounds(sys);
    return sys;
}

/// Cat map precomposed with the vertical-phase shear
/// (u,v) -> (u + eps sin(2pi v), v). Nonconstant Jacobian; |eps| < 0.1 keeps
/// the composition safely hyperbolic.
inline SurfaceSystem make_perturbed_cat(double eps) {
    if (!(std::fabs(eps) < 0.1))
        throw std::invalid_argument("make_perturbed_cat: need |eps| < 0.1");
    const double twopi = 2.0 * std::numbers::pi;
    const Jacobian2 A{2.0, 1.0, 1.0, 1.0};
    const Jacobian2 Ainv{1.0, -1.0, -1.0, 2.0};
    SurfaceSystem sys;
    sys.name = "perturbed_cat(eps=" + std::to_string(eps) + ")";
    sys.domain = DomainKind::torus;
    sys.forward = [=](Point2 p) {
        const double su = p.u + eps * std::sin(twopi * p.v);
        return canonical({2.0 * su + p.v, su + p.v, DomainKind::torus});
    };
    sys.inverse = [=](Point2 p) {
        const double su = Ainv.a * p.u + Ainv.b * p.v;
        const double v = Ainv.c * p.u + Ainv.d * p.v;
        return canonical({su - eps * std::sin(twopi * v), v, DomainKind::torus});
    };
    sys.jacobian = [=](Point2 p) {
        const double s = eps * twopi * std::cos(twopi * p.v);
        return A * Jacobian2{1.0, s, 0.0, 1.0};
    };
    estimate_norm_bounds(sys);
    return sys;
}

/// Newton polish of a user-supplied periodic seed: solves f^period(z) = z.
/// Returns the refined point; throws if the iteration does not settle.
inline Point2 refine_periodic_point(const SurfaceSystem& sys, Point2 seed, int period,
                                    int max_iter = 50, double tol = 1e-12) {
    if (period < 1) throw std::invalid_argument("refine_periodic_point: period >= 1");
    Point2 z = canonical(seed);
    for (int it = 0; it < max_iter; ++it) {
        Point2 w = z;
        Jacobian2 D = Jacobian2::identity();
        for (int i = 0; i < period; ++i) {
            D = sys.jacobian(w) * D;
            w = sys.step_unchecked(w);
        }
        const Vec2 g = displacement(z, w);  // f^p(z) - z, min-image on the torus
        if (g.norm() < tol) return z;
        // solve (D - I) delta = -g
        const Jacobian2 J{D.a - 1.0, D.b, D.c, D.d - 1.0};
        const double det = J.det();
        if (std::fabs(det) < 1e-14)
            throw std::runtime_error("refine_periodic_point: singular Newton step");
        const Vec2 delta{(-g.x * J.d + g.y * J.b) / det, (-J.a * g.y + J.c * g.x) / det};
        z = canonical({z.u + delta.x, z.v + delta.y, z.tag});
    }
    throw std::runtime_error("refine_periodic_point: no convergence");
}

/// Certify the shipped periodic sources: the orbit closes up to 1e-9 and the
/// period-cocycle has both eigenvalue moduli > 1.
inline bool certify_sources(const SurfaceSystem& sys, std::string* why = nullptr) {
    for (const auto& src : sys.periodic_sources) {
        Point2 w = canonical(src.point);
        Jacobian2 D = Jacobian2::identity();
        for (int i = 0; i < src.period; ++i) {
            D = sys.jacobian(w) * D;
            w = sys.step_unchecked(w);
        }
        if (distance(w, canonical(src.point)) >= 1e-9) {
            if (why) *why = sys.name + ": source orbit does not close";
            return false;
        }
        const double tr = D.a + D.d, det = D.det();
        const double disc = tr * tr - 4.0 * det;
        double m1, m2;
        if (disc >= 0) {
            const double s = std::sqrt(disc);
            m1 = std::fabs((tr + s) / 2);
            m2 = std::fabs((tr - s) / 2);
        } else {
            m1 = m2 = std::sqrt(std::fabs(det));
        }
        if (!(m1 > 1.0 && m2 > 1.0)) {
            if (why) *why = sys.name + ": source is not a repeller";
            return false;
        }
    }
    return true;
}

/// Build a system from a name and a key=value parameter map (the CLI front
/// door). Known names: cat, identity, shear, toral, diag, standard,
/// perturbed_cat.
inline SurfaceSystem make_system(const std::string& name,
                                 const std::map<std::string, double>& params = {}) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    SurfaceSystem sys;
    if (name == "cat") {
        sys = make_cat_map();
    } else if (name == "identity") {
        sys = make_identity_map();
    } else if (name == "shear") {
        sys = make_toral_automorphism(1, 1, 0, 1);
        sys.name = "shear";
    } else if (name == "toral") {
        sys = make_toral_automorphism(int(get("m11", 2)), int(get("m12", 1)),
                                      int(get("m21", 1)), int(get("m22", 1)));
    } else if (name == "diag") {
        sys = make_diag_linear(get("a", 1.5));
    } else if (name == "standard") {
        sys = make_standard_map(get("k", 6.0));
    } else if (name == "perturbed_cat") {
        sys = make_perturbed_cat(get("eps", 0.05));
    } else {
        throw std::invalid_argument("unknown system: " + name);
    }
    const double r = get("r", 0.0);
    if (r > 0) {
        if (r <= 1.0) throw std::invalid_argument("smoothness order must be > 1");
        sys.smoothness_order = r;
    }
    return sys;
}

}  // namespace volgrow
