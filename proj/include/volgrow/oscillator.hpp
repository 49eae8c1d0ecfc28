#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "volgrow/curve.hpp"
#include "volgrow/geometry.hpp"
#include "volgrow/quadrature.hpp"
#include "volgrow/series.hpp"

namespace volgrow {

// ---------------------------------------------------------------------------
// The oscillating testbed curve sigma(x) = (x, x^5 sin(1/x)) under the linear
// stretch diag(a, 3), measured inside the window [-1,1]^2. Everything here is
// closed form; the arc lengths are computed by oscillation-aware quadrature
// rather than by polylines, which turns the testbed into an independent
// pipeline against the curve module.
// ---------------------------------------------------------------------------

inline Point2 sigma_osc_point(double x) {
    if (x == 0.0) return {0.0, 0.0, DomainKind::plane_box};
    return {x, std::pow(x, 5) * std::sin(1.0 / x), DomainKind::plane_box};
}

/// d/dx (x, x^5 sin(1/x)) = (1, 5x^4 sin(1/x) - x^3 cos(1/x)); continuously
/// extended by (1, 0) at x = 0.
inline Vec2 sigma_osc_derivative(double x) {
    if (x == 0.0) return {1.0, 0.0};
    const double s = std::sin(1.0 / x), c = std::cos(1.0 / x);
    return {1.0, 5.0 * std::pow(x, 4) * s - std::pow(x, 3) * c};
}

inline Curve make_osc_curve() {
    Curve c;
    c.position = [](double t) { return sigma_osc_point(t); };
    c.derivative = [](double t) { return sigma_osc_derivative(t); };
    c.name = "osc";
    return c;
}

/// Image-curve height g_n(u) = 3^n a^{-5n} u^5 sin(a^n / u) and its
/// derivative, with the 3^n a^{-5n} prefactor handled in log scale.
inline void g_value_and_derivative(double u, double a, int n, double& g, double& dg) {
    if (u <= 0.0) {
        g = 0.0;
        dg = 0.0;
        return;
    }
    const double log_c = n * (std::log(3.0) - 5.0 * std::log(a));
    const double an = std::exp(n * std::log(a));
    const double env = std::exp(log_c + 5.0 * std::log(u));
    if (env < 1e-300) {
        g = 0.0;
        dg = 0.0;
        return;
    }
    const double t = an / u;
    const double s = std::sin(t), co = std::cos(t);
    g = env * s;
    dg = 5.0 * (env / u) * s - (env / u) * t * co;  // = 5 C u^4 sin - C a^n u^3 cos
}

/// Piecewise growth rate of the clipped lengths:
///   (1/5) log 3          for 1 < a <= 3^{1/5},
///   log 3 - 4 log a      for 3^{1/5} < a < 3^{1/4},
///   0                    for a >= 3^{1/4}.
inline double theoretical_rate(double a) {
    if (!(a > 1.0)) throw std::invalid_argument("theoretical_rate: need a > 1");
    const double log3 = std::log(3.0);
    const double b5 = std::exp(log3 / 5.0);
    const double b4 = std::exp(log3 / 4.0);
    if (a <= b5) return log3 / 5.0;
    if (a < b4) return log3 - 4.0 * std::log(a);
    return 0.0;
}

struct OscOptions {
    std::size_t cell_budget = 10'000'000;  // oscillation cells per horizon
    double tail_floor = 1e-300;
};

struct OscRow {
    int n = 0;
    double length = 0.0;              // Length(A^n sigma intersect [-1,1]^2)
    double value = 0.0;               // (1/n) log length
    double admissible_measure = 0.0;  // Lebesgue measure of I_n
    double quad_error = 0.0;
    std::size_t cells = 0;
    bool truncated = false;           // cell budget hit
};

struct OscGrowth {
    double a = 0.0;
    std::vector<OscRow> rows;
    GrowthSeries series;
};

namespace detail {

// Roots of tan t = t / 5 are the critical points of g_n. The function
// tan t - t/5 is strictly increasing on each branch (sec^2 >= 1 > 1/5), so
// each branch (k pi - pi/2, k pi + pi/2) holds exactly one root.
inline double tan_branch_root(std::int64_t k) {
    const double pi = std::numbers::pi;
    const double center = double(k) * pi;
    const double fuzz = std::max(1e-12, std::fabs(center) * 1e-13);
    double lo = center - pi / 2 + fuzz;
    double hi = center + pi / 2 - fuzz;
    auto h = [](double t) { return std::tan(t) - t / 5.0; };
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) < 0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * std::max(1.0, std::fabs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

// |g_n| - 1 changes sign exactly once on [lo, hi] by construction of the
// callers (g is single-signed and monotone there); bisect the crossing.
inline double g_unit_crossing(double lo, double hi, double a, int n) {
    double g, dg;
    auto below = [&](double u) {
        g_value_and_derivative(u, a, n, g, dg);
        return std::fabs(g) <= 1.0;
    };
    bool lo_below = below(lo);
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (below(mid) == lo_below)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// One clipped length L_n = integral over I_n of sqrt(1 + g_n'(u)^2), where
/// I_n = { u in [0,1] : |g_n(u)| <= 1 }.
///
/// The domain is walked in oscillation cells bounded by consecutive
/// u_k = 2 a^n / (k pi) (the grid t = a^n/u in (pi/2) Z), so each cell sees
/// at most a quarter period: sin and cos are single-signed, g is monotone
/// between critical points, and the admissibility boundary |g| = 1 is found
/// by at most two bisections per cell. Each admissible piece is integrated
/// by a 15-point Gauss rule with one adaptive split. The descent stops once
/// the bound on everything below, u_lo + C a^n u_lo^4 / 4 + C u_lo^5 in the
/// fully admissible regime, is resolved to the requested tolerance.
inline OscRow restricted_length(double a, int n, double tol, const OscOptions& opt = {}) {
    if (!(a > 1.0)) throw std::invalid_argument("restricted_length: need a > 1");
    if (n < 1 || !(tol > 0)) throw std::invalid_argument("restricted_length: bad n or tol");

    const double pi = std::numbers::pi;
    const double an = std::exp(n * std::log(a));
    const double log_c = n * (std::log(3.0) - 5.0 * std::log(a));

    auto env = [&](double u) { return std::exp(log_c + 5.0 * std::log(u)); };
    auto speed = [&](double u) {
        double g, dg;
        g_value_and_derivative(u, a, n, g, dg);
        return std::sqrt(1.0 + dg * dg);
    };
    auto g_at = [&](double u) {
        double g, dg;
        g_value_and_derivative(u, a, n, g, dg);
        return g;
    };

    OscRow row;
    row.n = n;

    double length = 0.0, measure = 0.0, err = 0.0;

    // integrate an admissible stretch [lo, hi]
    auto add_piece = [&](double lo, double hi) {
        if (!(hi > lo)) return;
        auto [val, e] = gauss15_once(speed, lo, hi);
        length += val;
        err += e;
        measure += hi - lo;
    };

    // process one monotone piece of a cell: g is single-signed and monotone
    auto add_monotone = [&](double lo, double hi) {
        if (!(hi > lo)) return;
        const bool lo_in = std::fabs(g_at(lo)) <= 1.0;
        const bool hi_in = std::fabs(g_at(hi)) <= 1.0;
        if (lo_in && hi_in) {
            add_piece(lo, hi);
        } else if (lo_in != hi_in) {
            const double mid = detail::g_unit_crossing(lo, hi, a, n);
            if (lo_in)
                add_piece(lo, mid);
            else
                add_piece(mid, hi);
        }
        // both outside: nothing admissible in this piece
    };

    // cell [u_lo, u_hi] with t = a^n/u in [k pi/2, (k+1) pi/2]; the cell sits
    // inside tan branch (k+1)/2, which holds at most one critical point of g
    auto add_cell = [&](double u_lo, double u_hi, std::int64_t k_left) {
        if (env(u_hi) <= 1.0) {
            add_piece(u_lo, u_hi);  // whole cell admissible
            return;
        }
        const std::int64_t branch = (k_left + 1) / 2;
        double split = -1.0;
        if (branch >= 1) {
            const double t_root = detail::tan_branch_root(branch);
            const double u_root = an / t_root;
            if (u_root > u_lo && u_root < u_hi) split = u_root;
        }
        if (split > 0) {
            add_monotone(u_lo, split);
            add_monotone(split, u_hi);
        } else {
            add_monotone(u_lo, u_hi);
        }
    };

    // walk cells downward from u = 1; t = a^n/u ascends the (pi/2) grid
    const double t_start = an;
    std::int64_t k = std::int64_t(std::floor(t_start / (pi / 2)));
    double u_hi = 1.0;
    while (true) {
        if (row.cells >= opt.cell_budget) {
            row.truncated = true;
            break;
        }
        const double t_next = (k + 1) * (pi / 2);
        double u_lo = an / t_next;
        if (u_lo >= u_hi) {  // degenerate first cell when t_start sits on the grid
            ++k;
            continue;
        }
        // tail stopping test at the current frontier: below u_hi the extra
        // length over the straight run is at most int |g'| = osc_tail, and at
        // most (max |g'| / 2) osc_tail once |g'| < 1 (quadratic surplus)
        const double c_an_u4 = std::exp(log_c + n * std::log(a) + 4.0 * std::log(u_hi));
        const double c_u5 = std::exp(log_c + 5.0 * std::log(u_hi));
        const double osc_tail = c_an_u4 / 4.0 + c_u5;
        const double max_dg = c_an_u4 / u_hi + 5.0 * c_u5 / u_hi;
        const double surplus = osc_tail * std::min(1.0, 0.5 * max_dg);
        if (env(u_hi) <= 1.0 && surplus <= tol * (length + u_hi) + opt.tail_floor) {
            // flat remainder: between u_hi and 0 the curve is admissible and
            // within surplus of straight
            length += u_hi + 0.5 * surplus;
            err += 0.5 * surplus;
            measure += u_hi;
            u_hi = 0.0;
            break;
        }
        add_cell(u_lo, u_hi, k);
        ++row.cells;
        u_hi = u_lo;
        ++k;
    }

    row.length = length;
    row.value = std::log(std::max(length, 1e-300)) / n;
    row.admissible_measure = measure;
    row.quad_error = err;
    return row;
}

/// (1/n) log L_n over n_list, extrapolated by the 1/n fit over the largest
/// half. Horizons beyond the cell budget are dropped and flagged.
inline OscGrowth restricted_growth(double a, const std::vector<int>& n_list, double tol,
                                   const OscOptions& opt = {}) {
    OscGrowth out;
    out.a = a;
    std::vector<SeriesEntry> entries;
    bool truncated = false;
    for (int n : n_list) {
        OscRow row = restricted_length(a, n, tol, opt);
        if (row.truncated) {
            truncated = true;
            break;
        }
        out.rows.push_back(row);
        entries.push_back({row.n, row.value});
    }
    out.series = make_series(std::move(entries), ExtrapolationMethod::linear_inv_n,
                             "osc:a=" + std::to_string(a));
    out.series.reliable = !truncated;
    return out;
}

/// Numeric check of the oscillatory integral lower bound
///   int_0^b u^3 |cos(a^n/u)| du >= a^{4n} b^4 / (2 pi (a^n + 2 pi b)^4).
struct CosIntegralAudit {
    double numeric = 0.0;       // cell quadrature, tail credited at half
    double numeric_low = 0.0;   // cells minus the accumulated error estimate
    double bound = 0.0;
    std::size_t cells = 0;
    bool pass = false;
};

inline CosIntegralAudit cos_integral_audit(double a, double b, int n, double tol = 1e-6,
                                           const OscOptions& opt = {}) {
    if (!(a > 0) || !(b > 0) || n < 1)
        throw std::invalid_argument("cos_integral_audit: need a, b > 0 and n >= 1");
    const double pi = std::numbers::pi;
    const double an = std::exp(n * std::log(a));
    auto f = [&](double u) { return u * u * u * std::fabs(std::cos(an / u)); };

    CosIntegralAudit audit;
    audit.bound = std::exp(4.0 * n * std::log(a) + 4.0 * std::log(b) -
                           std::log(2.0 * pi) - 4.0 * std::log(an + 2.0 * pi * b));

    double acc = 0.0, err = 0.0;
    std::int64_t k = std::int64_t(std::floor(an / b / (pi / 2)));
    double u_hi = b;
    while (audit.cells < opt.cell_budget) {
        const double t_next = (k + 1) * (pi / 2);
        double u_lo = an / t_next;
        if (u_lo >= u_hi) {
            ++k;
            continue;
        }
        const double tail = u_hi * u_hi * u_hi * u_hi / 4.0;  // int_0^{u_hi} u^3
        if (tail <= tol * acc + opt.tail_floor) {
            acc += 0.5 * tail;
            err += 0.5 * tail;
            u_hi = 0.0;
            break;
        }
        auto [val, e] = gauss15_once(f, u_lo, u_hi);
        acc += val;
        err += e;
        ++audit.cells;
        u_hi = u_lo;
        ++k;
    }
    audit.numeric = acc;
    audit.numeric_low = acc - err;
    audit.pass = audit.numeric_low >= audit.bound;
    return audit;
}

/// Count of monotonicity changes of g_n on [u_n, 1] against the branch-count
/// bound 3^{n/5} / pi + 2: critical points solve tan t = t/5, one root per
/// branch, counted on t in [a^n, 3^{n/5}].
struct MonotonicityAudit {
    int numeric_count = 0;
    double branch_count_bound = 0.0;
    bool pass = false;
};

inline MonotonicityAudit monotonicity_count_audit(double a, int n) {
    const double log3 = std::log(3.0);
    if (!(a > 1.0) || !(a <= std::exp(log3 / 5.0) + 1e-12))
        throw std::invalid_argument("monotonicity_count_audit: need 1 < a <= 3^{1/5}");
    const double pi = std::numbers::pi;
    const double t0 = std::exp(n * std::log(a));
    const double t1 = std::exp(n * log3 / 5.0);

    MonotonicityAudit audit;
    audit.branch_count_bound = t1 / pi + 2.0;
    int count = 0;
    const int k_lo = std::max(1, int(std::floor(t0 / pi)));
    const int k_hi = int(std::ceil(t1 / pi)) + 1;
    for (int k = k_lo; k <= k_hi; ++k) {
        const double root = detail::tan_branch_root(k);
        if (root >= t0 && root <= t1) ++count;
    }
    audit.numeric_count = count;
    audit.pass = count <= audit.branch_count_bound;
    return audit;
}

}  // namespace volgrow
