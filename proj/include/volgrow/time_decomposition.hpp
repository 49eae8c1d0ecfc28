#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "volgrow/curve.hpp"
#include "volgrow/geometry.hpp"
#include "volgrow/system.hpp"

namespace volgrow {

/// Knobs of the orbit-level diagnostics. tau is the per-step expansion
/// threshold in the geometric-time inequality (the natural unit-rate choice;
/// the precise size only rescales the notion). eps_scale stands in for the
/// small reference scale of the trapping-ball radius.
struct TimeOptions {
    double tau = 1.0;
    double eps_scale = 0.01;
    int expand_L = 3;
};

inline double default_trapping_radius(const SurfaceSystem& sys, const TimeOptions& opt = {}) {
    return opt.eps_scale / (100.0 * sys.df_norm);
}

/// Geometric times of a rho' sequence: m in [1, n] is geometric iff every
/// trailing window [k, m) accumulates at least tau per step,
///   sum_{i=k}^{m-1} rho'_i >= tau (m - k)   for all 0 <= k < m.
/// With prefix sums S_j of (rho'_i - tau), this reads S_m >= max_{k<m} S_k,
/// which a single sweep with a running maximum decides in O(n).
inline std::vector<int> geometric_times_from_rho(const std::vector<double>& rho_prime,
                                                 double tau = 1.0) {
    const int n = int(rho_prime.size());
    std::vector<int> out;
    double s = 0.0;        // S_m
    double best = 0.0;     // max over k < m of S_k (S_0 = 0)
    for (int m = 1; m <= n; ++m) {
        s += rho_prime[m - 1] - tau;
        if (s >= best) out.push_back(m);
        best = std::max(best, s);
    }
    return out;
}

/// rho' along the lifted orbit of x_hat, then the geometric-time sweep.
inline std::vector<int> geometric_times(const SurfaceSystem& sys, TangentPoint xv, int n,
                                        double tau = 1.0) {
    if (n < 1) throw std::invalid_argument("geometric_times: n must be >= 1");
    std::vector<double> rp(n);
    for (int i = 0; i < n; ++i) {
        rp[i] = rho_prime(sys, xv);
        if (i + 1 < n) xv = lift_step(sys, xv);
    }
    return geometric_times_from_rho(rp, tau);
}

/// L-expansion: union of the integer intervals [i, j] over pairs i <= j in E
/// with j - i <= L. Consecutive elements at gap <= L glue into one block;
/// L = 0 returns E itself.
inline std::vector<int> expand_times(const std::vector<int>& e_sorted, int L) {
    if (L < 0) throw std::invalid_argument("expand_times: L must be >= 0");
    std::vector<int> out;
    for (std::size_t idx = 0; idx < e_sorted.size(); ++idx) {
        if (idx > 0 && e_sorted[idx] <= e_sorted[idx - 1])
            throw std::invalid_argument("expand_times: E must be sorted strictly");
        int from = e_sorted[idx];
        if (idx > 0 && e_sorted[idx] - e_sorted[idx - 1] <= L)
            from = e_sorted[idx - 1] + 1;  // interval from the previous element glues
        if (!out.empty()) from = std::max(from, out.back() + 1);
        for (int t = from; t <= e_sorted[idx]; ++t) out.push_back(t);
    }
    return out;
}

/// Per-orbit record of the cocycle diagnostics at horizon n.
struct OrbitProfile {
    TangentPoint start;
    int n = 0;
    double tau = 1.0;
    int L = 0;
    std::vector<double> rho_vals;        // rho(f_hat^i x_hat), i in [0, n)
    std::vector<double> rho_prime_vals;  // rho'
    std::vector<int> geometric;          // E, subset of [1, n]
    std::vector<int> expanded;           // E^L
    std::vector<int> beta_prime;         // ceil log ||Df_{f^i x}||
    std::vector<int> beta_double_prime;  // ceil log ||Df(f_hat^i x_hat)||
    int trapping = 0;                    // t_n of the base point
};

namespace detail {

// Values within 1e-9 of an integer are snapped before the ceiling; exact
// integer logs (identity, e^2-type stretches) must quantize to themselves.
inline int snapped_ceil(double x) {
    const double r = std::round(x);
    if (std::fabs(x - r) < 1e-9) return int(r);
    return int(std::ceil(x));
}

}  // namespace detail

/// Quantized derivative data along the orbit: per i in [0, n),
///   beta'_i  = (1/p) ceil log ||Df^p_{f^i x}||,
///   beta''_i = (1/p) ceil log ||Df^p(f_hat^i x_hat)||.
/// p = 1 lands on the integer grid, p > 1 on the 1/p grid.
struct QuantizedData {
    int p = 1;
    std::vector<double> beta_prime;
    std::vector<double> beta_double_prime;
};

inline QuantizedData quantized_data(const SurfaceSystem& sys, TangentPoint xv, int n,
                                    int p = 1) {
    if (p < 1) throw std::invalid_argument("quantized_data: p must be >= 1");
    QuantizedData q;
    q.p = p;
    q.beta_prime.reserve(n);
    q.beta_double_prime.reserve(n);
    for (int i = 0; i < n; ++i) {
        Point2 y = xv.base;
        ScaledCocycle co;
        for (int k = 0; k < p; ++k) {
            co.accumulate(sys.jacobian(y));
            y = sys.step_checked(y, i + k + 1);
        }
        q.beta_prime.push_back(detail::snapped_ceil(co.log_operator_norm()) / double(p));
        q.beta_double_prime.push_back(
            detail::snapped_ceil(co.log_apply_norm(unit_direction(xv.angle))) / double(p));
        if (i + 1 < n) xv = lift_step(sys, xv);
    }
    return q;
}

/// Number of initial steps the orbit of x shadows some periodic source
/// within radius: max { 0 < k <= n : x in B(z_s, k, radius) for some s },
/// and 0 when x starts outside every radius-ball.
inline int trapping_time(const SurfaceSystem& sys, const Point2& x, int n, double radius) {
    int best = 0;
    for (const auto& src : sys.periodic_sources) {
        Point2 a = canonical(x);
        Point2 z = canonical(src.point);
        int k = 0;
        try {
            while (k < n && distance(a, z) < radius) {
                ++k;
                if (k < n) {
                    a = sys.step_checked(a, k);
                    z = sys.step_unchecked(z);
                }
            }
        } catch (const escape_error&) {
            // leaving the domain certainly leaves the ball
        }
        best = std::max(best, k);
    }
    return best;
}

inline OrbitProfile build_orbit_profile(const SurfaceSystem& sys, const TangentPoint& start,
                                        int n, const TimeOptions& opt = {},
                                        double trapping_radius = -1.0) {
    if (n < 1) throw std::invalid_argument("build_orbit_profile: n must be >= 1");
    OrbitProfile prof;
    prof.start = start;
    prof.n = n;
    prof.tau = opt.tau;
    prof.L = opt.expand_L;

    TangentPoint xv = start;
    prof.rho_vals.reserve(n);
    prof.rho_prime_vals.reserve(n);
    prof.beta_prime.reserve(n);
    prof.beta_double_prime.reserve(n);
    for (int i = 0; i < n; ++i) {
        prof.rho_vals.push_back(rho(sys, xv));
        prof.rho_prime_vals.push_back(rho_prime(sys, xv));
        prof.beta_prime.push_back(
            detail::snapped_ceil(std::log(operator_norm(sys.jacobian(xv.base)))));
        prof.beta_double_prime.push_back(detail::snapped_ceil(prof.rho_vals.back()));
        if (i + 1 < n) xv = lift_step(sys, xv);
    }
    prof.geometric = geometric_times_from_rho(prof.rho_prime_vals, opt.tau);
    prof.expanded = expand_times(prof.geometric, opt.expand_L);
    const double radius =
        trapping_radius > 0 ? trapping_radius : default_trapping_radius(sys, opt);
    prof.trapping = trapping_time(sys, start.base, n, radius);
    return prof;
}

/// Consistency relation between non-geometric times and the last geometric
/// time before them: if m is not geometric and n* is the largest geometric
/// time below m (0 if none), the window [n*, m) accumulates strictly less
/// than tau per step. This holds identically for every rho' sequence; a
/// false return means the implementation is broken, not the orbit.
inline bool geometric_gap_audit(const OrbitProfile& prof) {
    const int n = prof.n;
    std::vector<double> s(n + 1, 0.0);
    for (int j = 1; j <= n; ++j) s[j] = s[j - 1] + prof.rho_prime_vals[j - 1] - prof.tau;
    std::vector<bool> geo(n + 1, false);
    for (int g : prof.geometric) geo[g] = true;
    int last_geo = 0;
    for (int m = 1; m <= n; ++m) {
        if (geo[m]) {
            last_geo = m;
            continue;
        }
        // sum_{i = n*}^{m-1} rho' - tau (m - n*) = S_m - S_{n*}
        if (!(s[m] - s[last_geo] < 0.0)) return false;
    }
    return true;
}

/// Uniform-weight empirical measure (1/n) sum_{i in E} delta at f_hat^i(x_hat).
struct EmpiricalMeasure {
    std::vector<TangentPoint> atoms;
    double weight = 0.0;      // 1/n per atom
    double total_mass = 0.0;  // #E / n
};

inline EmpiricalMeasure empirical_measure(const SurfaceSystem& sys, TangentPoint xv, int n,
                                          const std::vector<int>& e_times) {
    if (n < 1) throw std::invalid_argument("empirical_measure: n must be >= 1");
    EmpiricalMeasure mu;
    mu.weight = 1.0 / n;
    std::vector<bool> pick(n, false);
    for (int i : e_times) {
        if (i < 0 || i >= n)
            throw std::invalid_argument("empirical_measure: E must lie in [0, n)");
        pick[i] = true;
    }
    for (int i = 0; i < n; ++i) {
        if (pick[i]) mu.atoms.push_back(xv);
        if (i + 1 < n) xv = lift_step(sys, xv);
    }
    mu.total_mass = mu.atoms.size() * mu.weight;
    return mu;
}

inline std::vector<Point2> project_measure(const EmpiricalMeasure& mu) {
    std::vector<Point2> out;
    out.reserve(mu.atoms.size());
    for (const auto& a : mu.atoms) out.push_back(a.base);
    return out;
}

/// #([m, n) intersect E_L) / n.
inline double alpha_fraction(const std::vector<int>& e_l, int m, int n) {
    if (m < 0 || m > n || n < 1)
        throw std::invalid_argument("alpha_fraction: need 0 <= m <= n, n >= 1");
    int cnt = 0;
    for (int i : e_l)
        if (i >= m && i < n) ++cnt;
    return double(cnt) / n;
}

/// Finite-horizon split of a curve's measured growth into an entropic share
/// (weight alpha) and a regularity-limited share (weight 1 - alpha). alpha
/// averages, over sampled curve points, the expanded-geometric-time fraction
/// past each point's trapping time. Reported, never asserted: the asymptotic
/// inequality hides unquantified constants.
struct ConvexSplitReport {
    int n = 0;
    double measured_growth = 0.0;   // (1/n) log Vol(f^n sigma)
    bool measured_reliable = true;  // false when the polyline budget ran out
    double alpha_mean = 0.0;
    double reference_h = 0.0;
    double reference_lambda = 0.0;
    double yomdin_term = 0.0;       // reference_lambda / r
    double convex_bound = 0.0;      // alpha h + (1 - alpha) lambda / r
    double residual = 0.0;          // measured - bound
    std::vector<double> alphas;     // per sampled curve point
};

inline ConvexSplitReport convex_split_report(const SurfaceSystem& sys, const Curve& curve,
                                             int n, int L, double reference_h,
                                             double reference_lambda,
                                             const TimeOptions& opt = {},
                                             int curve_samples = 32,
                                             double curve_tol = 1e-4) {
    ConvexSplitReport rep;
    rep.n = n;
    rep.reference_h = reference_h;
    rep.reference_lambda = reference_lambda;
    rep.yomdin_term = reference_lambda / sys.smoothness_order;
    const ArcLengthResult arc = arc_length_detail(sys, curve, n, curve_tol);
    rep.measured_growth = std::log(std::max(arc.length, 1e-300)) / n;
    rep.measured_reliable = !arc.budget_exhausted;

    TimeOptions topt = opt;
    topt.expand_L = L;
    const double radius = default_trapping_radius(sys, topt);
    double alpha_sum = 0.0;
    for (int j = 0; j < curve_samples; ++j) {
        const double t = (j + 0.5) / curve_samples;
        const Vec2 d = curve.derivative(t);
        TangentPoint xv{canonical(curve.position(t)),
                        reduce_angle_mod_pi(std::atan2(d.y, d.x))};
        const OrbitProfile prof = build_orbit_profile(sys, xv, n, topt, radius);
        const double a = alpha_fraction(prof.expanded, prof.trapping, n);
        rep.alphas.push_back(a);
        alpha_sum += a;
    }
    rep.alpha_mean = alpha_sum / curve_samples;
    rep.convex_bound =
        rep.alpha_mean * reference_h + (1.0 - rep.alpha_mean) * rep.yomdin_term;
    rep.residual = rep.measured_growth - rep.convex_bound;
    return rep;
}

}  // namespace volgrow
