#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "volgrow/cocycle_integral.hpp"
#include "volgrow/curve.hpp"
#include "volgrow/entropy_bounds.hpp"
#include "volgrow/oscillator.hpp"
#include "volgrow/systems.hpp"
#include "volgrow/time_decomposition.hpp"

namespace volgrow {

struct SelftestResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace selftest_detail {

// quadratic-time restatement of the geometric-time definition, kept separate
// from the shipped sweep on purpose
inline std::vector<int> geometric_times_direct(const std::vector<double>& rp, double tau) {
    std::vector<int> out;
    const int n = int(rp.size());
    for (int m = 1; m <= n; ++m) {
        bool ok = true;
        for (int k = 0; k < m && ok; ++k) {
            double sum = 0.0;
            for (int i = k; i < m; ++i) sum += rp[i];
            if (!(sum >= tau * (m - k))) ok = false;
        }
        if (ok) out.push_back(m);
    }
    return out;
}

inline Curve straight_test_curve(double cx, double cy, double dir, double speed) {
    Curve c;
    c.position = [=](double t) {
        return canonical({cx + speed * t * std::cos(dir), cy + speed * t * std::sin(dir),
                          DomainKind::torus});
    };
    c.derivative = [=](double t) {
        (void)t;
        return Vec2{speed * std::cos(dir), speed * std::sin(dir)};
    };
    c.higher_deriv_bounds = {0.0, 0.0};
    c.name = "selftest_segment";
    return c;
}

}  // namespace selftest_detail

/// Condensed deterministic invariant suite behind the selftest subcommand.
/// Fixed seeds, fixed order; output is reproducible byte for byte.
inline std::vector<SelftestResult> run_selftest() {
    std::vector<SelftestResult> results;
    auto record = [&](const std::string& name, bool pass, const std::string& detail = "") {
        results.push_back({name, pass, detail});
    };

    // operator norm vs direction scan
    {
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> uni(-3.0, 3.0);
        bool ok = true;
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Jacobian2 j{uni(rng), uni(rng), uni(rng), uni(rng)};
            double brute = 0.0;
            for (int k = 0; k < 3600; ++k) {
                const double a = std::numbers::pi * k / 3600;
                brute = std::max(brute, j.apply({std::cos(a), std::sin(a)}).norm());
            }
            const double rel = std::fabs(operator_norm(j) - brute) / std::max(1.0, brute);
            worst = std::max(worst, rel);
            ok = ok && rel < 1e-6;
        }
        record("operator_norm_direction_scan", ok, "max_rel=" + fmt_g17(worst));
    }

    // cocycle composition and submultiplicativity
    {
        std::mt19937_64 rng(103);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        bool ok = true;
        for (const auto& sys : {make_cat_map(), make_standard_map(6.0),
                                make_perturbed_cat(0.05)}) {
            for (int trial = 0; trial < 400 && ok; ++trial) {
                const Point2 x{uni(rng), uni(rng), DomainKind::torus};
                const int n = int(uni(rng) * 12);
                const int m = int(uni(rng) * (n + 1));
                const auto jn = cocycle_jacobian(sys, x, n);
                const auto jm = cocycle_jacobian(sys, x, m);
                Point2 fmx = canonical(x);
                for (int i = 0; i < m; ++i) fmx = sys.step_unchecked(fmx);
                const auto rest = cocycle_jacobian(sys, fmx, n - m);
                const auto prod = rest * jm;
                const double scale = std::max(1.0, jn.max_abs_entry());
                ok = ok && std::fabs(prod.a - jn.a) / scale < 1e-9 &&
                     std::fabs(prod.b - jn.b) / scale < 1e-9 &&
                     std::fabs(prod.c - jn.c) / scale < 1e-9 &&
                     std::fabs(prod.d - jn.d) / scale < 1e-9 &&
                     operator_norm(jn) <=
                         operator_norm(rest) * operator_norm(jm) * (1 + 1e-12);
            }
        }
        record("cocycle_composition", ok);
    }

    // inverse round trip
    {
        std::mt19937_64 rng(107);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        bool ok = true;
        for (const auto& sys : {make_cat_map(), make_identity_map(),
                                make_standard_map(2.5), make_perturbed_cat(0.03)}) {
            for (int i = 0; i < 250 && ok; ++i) {
                const Point2 x{uni(rng), uni(rng), DomainKind::torus};
                ok = distance(sys.step_back(sys.step_unchecked(x)), canonical(x)) < 1e-9;
            }
        }
        record("inverse_round_trip", ok);
    }

    // analytic jacobians vs finite differences
    {
        std::mt19937_64 rng(109);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        bool ok = true;
        for (const auto& sys : {make_cat_map(), make_standard_map(6.0),
                                make_perturbed_cat(0.05)}) {
            for (int i = 0; i < 100 && ok; ++i) {
                const Point2 x{uni(rng), uni(rng), DomainKind::torus};
                const auto ja = sys.jacobian(x), jf = fd_jacobian(sys, x);
                ok = std::fabs(ja.a - jf.a) <= 1e-5 && std::fabs(ja.b - jf.b) <= 1e-5 &&
                     std::fabs(ja.c - jf.c) <= 1e-5 && std::fabs(ja.d - jf.d) <= 1e-5;
            }
        }
        record("jacobian_finite_difference", ok);
    }

    // Jensen ordering: zero gap for constant Jacobians, strict otherwise
    {
        SamplePlan plan;
        plan.density_per_axis = 32;
        const auto rep_cat = jensen_audit(make_cat_map(), plan, 8);
        const auto rep_pert = jensen_audit(make_perturbed_cat(0.05), plan, 8);
        bool ok = std::fabs(rep_cat.jensen_gap) <= 1e-12 && rep_pert.jensen_gap > 1e-4;
        auto sm = make_standard_map(6.0);
        for (int n : {2, 4, 6, 8, 10}) {
            const auto rep = jensen_audit(sm, plan, n);
            ok = ok && rep.jensen_gap >= -1e-12;
        }
        record("jensen_ordering", ok,
               "cat_gap=" + fmt_g17(rep_cat.jensen_gap) +
                   " pert_gap=" + fmt_g17(rep_pert.jensen_gap));
    }

    // geometric time sweep vs the quadratic definition
    {
        std::mt19937_64 rng(113);
        std::normal_distribution<double> gauss(1.0, 1.2);
        bool ok = true;
        for (int trial = 0; trial < 200 && ok; ++trial) {
            std::vector<double> rp(1 + trial % 150);
            for (auto& v : rp) v = gauss(rng);
            ok = geometric_times_from_rho(rp) ==
                 selftest_detail::geometric_times_direct(rp, 1.0);
        }
        record("geometric_times_oracle", ok);
    }

    // gap audit on built-in orbits
    {
        std::mt19937_64 rng(127);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        bool ok = true;
        auto sm = make_standard_map(6.0);
        for (int trial = 0; trial < 200 && ok; ++trial) {
            TangentPoint xv{{uni(rng), uni(rng), DomainKind::torus},
                            uni(rng) * std::numbers::pi};
            ok = geometric_gap_audit(build_orbit_profile(sm, xv, 80));
        }
        record("geometric_gap_consistency", ok);
    }

    // decomposition contract at eps = 1/100
    {
        bool ok = true;
        int checked = 0;
        for (double dir : {0.1, 2.1, 4.4}) {
            const Curve c = selftest_detail::straight_test_curve(0.2, 0.7, dir, 0.8);
            auto pieces = decompose_eps_bounded(c, 0.01);
            ok = ok && pieces.size() == 100;
            for (const auto& p : pieces) {
                ok = ok && is_eps_bounded(p, 0.01);
                ++checked;
            }
        }
        record("eps_bounded_decomposition", ok, "pieces=" + std::to_string(checked));
    }

    // straight segments under the cat map stay exact
    {
        auto cat = make_cat_map();
        const Vec2 d{0.3, 0.2};
        const Curve seg = selftest_detail::straight_test_curve(
            0.1, 0.2, std::atan2(d.y, d.x), d.norm());
        bool ok = true;
        for (int n : {1, 3, 6}) {
            const double expect =
                cocycle_jacobian(cat, {0, 0, DomainKind::torus}, n).apply(d).norm();
            ok = ok && std::fabs(arc_length(cat, seg, n, 1e-7) - expect) <
                           1e-9 * std::max(1.0, expect);
        }
        record("linear_arc_length", ok);
    }

    // packing-covering sandwich
    {
        auto cat = make_cat_map();
        std::vector<Point2> cloud;
        for (int i = 0; i < 48; ++i)
            for (int j = 0; j < 48; ++j)
                cloud.push_back({(i + 0.5) / 48, (j + 0.5) / 48, DomainKind::torus});
        bool ok = true;
        std::ostringstream detail;
        for (double eps : {0.2, 0.1}) {
            for (int n : {2, 6}) {
                const auto sep = greedy_separated_set(cat, cloud, n, eps);
                const auto span = greedy_spanning_set(cat, cloud, n, eps);
                const auto span2 = greedy_spanning_set(cat, cloud, n, eps / 2);
                ok = ok && span.size() <= sep.points.size() &&
                     sep.points.size() <= span2.size();
                ok = ok && verify_separated(cat, sep);
                detail << " " << span.size() << "/" << sep.points.size() << "/"
                       << span2.size();
            }
        }
        record("packing_covering_sandwich", ok, detail.str());
    }

    // oscillating example: continuity of the rate and the integral bound
    {
        const double log3 = std::log(3.0);
        const double b5 = std::exp(log3 / 5.0);
        bool ok = std::fabs(theoretical_rate(b5) - log3 / 5.0) < 1e-12;
        for (double a : {1.2, 1.7}) {
            for (int n : {1, 3, 5}) {
                ok = ok && cos_integral_audit(a, 1.0, n).pass;
            }
        }
        auto g = restricted_growth(1.5, {2, 4, 6, 8, 10}, 1e-4);
        ok = ok && std::fabs(g.series.extrapolated_rate) < 0.01;
        record("oscillating_example", ok);
    }

    // shipped periodic sources certify
    {
        std::string why;
        bool ok = certify_sources(make_diag_linear(1.5), &why) &&
                  certify_sources(make_diag_linear(1.1), &why);
        record("periodic_source_certificates", ok, why);
    }

    return results;
}

}  // namespace volgrow
