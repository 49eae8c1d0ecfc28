#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "volgrow/curve.hpp"
#include "volgrow/geometry.hpp"
#include "volgrow/system.hpp"

namespace volgrow::testing {

// ---------------------------------------------------------------------------
// Independent oracles. These stay brute-force on purpose: they must not share
// code paths with the implementations they check.
// ---------------------------------------------------------------------------

/// Operator norm by scanning unit directions.
inline double operator_norm_bruteforce(const Jacobian2& j, int directions = 3600) {
    double best = 0.0;
    for (int k = 0; k < directions; ++k) {
        const double a = std::numbers::pi * k / directions;
        best = std::max(best, j.apply({std::cos(a), std::sin(a)}).norm());
    }
    return best;
}

/// Geometric times straight from the definition: m in [1, n] qualifies iff
/// sum_{i=k}^{m-1} rho'_i >= tau (m - k) for every 0 <= k < m. O(n^2).
inline std::vector<int> geometric_times_bruteforce(const std::vector<double>& rho_prime,
                                                   double tau = 1.0) {
    const int n = int(rho_prime.size());
    std::vector<int> out;
    for (int m = 1; m <= n; ++m) {
        bool ok = true;
        for (int k = 0; k < m && ok; ++k) {
            double sum = 0.0;
            for (int i = k; i < m; ++i) sum += rho_prime[i];
            if (!(sum >= tau * (m - k))) ok = false;
        }
        if (ok) out.push_back(m);
    }
    return out;
}

/// Expansion straight from the definition: union of [i, j] over pairs.
inline std::vector<int> expand_times_bruteforce(const std::vector<int>& e, int L) {
    std::vector<int> out;
    for (int i : e) {
        for (int j : e) {
            if (j < i || j - i > L) continue;
            for (int t = i; t <= j; ++t)
                if (out.empty() || out.back() != t) {
                    // keep sorted unique; e is sorted so t ascends per block
                    bool seen = false;
                    for (int s : out) seen = seen || s == t;
                    if (!seen) out.push_back(t);
                }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Planar linear system (u, v) -> (a u, d v) on a box, no entropy metadata.
/// Degenerate stretches (a = 1) are allowed here for oracle tests.
inline SurfaceSystem make_linear_plane(double a, double d, Box box = {-2, 2, -2, 2}) {
    SurfaceSystem sys;
    sys.name = "linear_plane";
    sys.domain = DomainKind::plane_box;
    sys.box = box;
    sys.forward = [a, d](Point2 p) { return Point2{a * p.u, d * p.v, DomainKind::plane_box}; };
    sys.inverse = [a, d](Point2 p) { return Point2{p.u / a, p.v / d, DomainKind::plane_box}; };
    sys.jacobian = [a, d](Point2) { return Jacobian2{a, 0.0, 0.0, d}; };
    sys.df_norm = std::max(std::fabs(a), std::fabs(d));
    sys.dfinv_norm = 1.0 / std::min(std::fabs(a), std::fabs(d));
    return sys;
}

/// Rotation by angle on a generous box.
inline SurfaceSystem make_rotation_plane(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    SurfaceSystem sys;
    sys.name = "rotation_plane";
    sys.domain = DomainKind::plane_box;
    sys.box = {-10, 10, -10, 10};
    sys.forward = [c, s](Point2 p) {
        return Point2{c * p.u - s * p.v, s * p.u + c * p.v, DomainKind::plane_box};
    };
    sys.inverse = [c, s](Point2 p) {
        return Point2{c * p.u + s * p.v, -s * p.u + c * p.v, DomainKind::plane_box};
    };
    sys.jacobian = [c, s](Point2) { return Jacobian2{c, -s, s, c}; };
    return sys;
}

/// Random analytic curve meeting the admissibility contract: C^r norm <= 1,
/// pointwise speed >= 1/2, with honest closed-form higher-derivative bounds.
/// Straight run at speed in [0.6, 0.9] plus a small sine wobble; the wobble
/// is kept under speed/6 through the third derivative, so these curves are
/// bounded as well as admissible.
inline Curve random_admissible_curve(std::mt19937_64& rng, DomainKind tag = DomainKind::torus) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double speed = 0.6 + 0.3 * uni(rng);
    const double dir = 2.0 * std::numbers::pi * uni(rng);
    const double cx = uni(rng), cy = uni(rng);
    const double omega = 1.0 + 2.0 * uni(rng);          // <= 3
    const double amp = 0.003 * uni(rng);                // q omega^3 <= 0.081 < 0.576/6
    const double phase = 2.0 * std::numbers::pi * uni(rng);
    const Vec2 t_dir{std::cos(dir), std::sin(dir)};
    const Vec2 n_dir{-std::sin(dir), std::cos(dir)};

    Curve c;
    c.position = [=](double t) {
        const double along = speed * t;
        const double across = amp * std::sin(omega * t + phase);
        return canonical({cx + along * t_dir.x + across * n_dir.x,
                          cy + along * t_dir.y + across * n_dir.y, tag});
    };
    c.derivative = [=](double t) {
        const double dacross = amp * omega * std::cos(omega * t + phase);
        return t_dir * speed + n_dir * dacross;
    };
    c.higher_deriv_bounds = {amp * omega * omega, amp * omega * omega * omega};
    c.name = "random_admissible";
    return c;
}

inline std::vector<Point2> torus_grid(int per_axis) {
    std::vector<Point2> out;
    out.reserve(std::size_t(per_axis) * per_axis);
    for (int i = 0; i < per_axis; ++i)
        for (int j = 0; j < per_axis; ++j)
            out.push_back({(i + 0.5) / per_axis, (j + 0.5) / per_axis, DomainKind::torus});
    return out;
}

inline double cat_entropy() { return std::log((3.0 + std::sqrt(5.0)) / 2.0); }

}  // namespace volgrow::testing
