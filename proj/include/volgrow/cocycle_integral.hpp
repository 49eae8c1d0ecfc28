#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "volgrow/curve.hpp"
#include "volgrow/geometry.hpp"
#include "volgrow/parallel.hpp"
#include "volgrow/sampling.hpp"
#include "volgrow/series.hpp"
#include "volgrow/system.hpp"

namespace volgrow {

enum class EscapePolicy {
    drop_and_count,  // escaped samples leave the average, report flags > 10%
    ignore_domain,   // evaluate the map by formula everywhere (linear testbeds)
};

/// Snapshot of both integral quantities at one time n. The area-normalized
/// mean makes the Jensen gap a direct subtraction.
struct IntegralReport {
    int n = 0;
    double log_of_mean = 0.0;  // log of area-weighted mean of ||Df^n||
    double mean_of_log = 0.0;  // area-weighted mean of log ||Df^n||
    double jensen_gap = 0.0;   // log_of_mean - mean_of_log, >= 0 up to roundoff
    std::size_t samples = 0;
    std::size_t escapes = 0;
    bool reliable = true;      // false when more than 10% of samples escaped
};

namespace detail {

// log ||Df^n|| per sample per requested n; NaN marks an escaped horizon.
struct CocycleTable {
    std::vector<int> n_list;
    std::vector<WeightedPoint> pts;
    std::vector<std::vector<double>> log_norms;  // [sample][n index]

    bool valid(std::size_t i, std::size_t k) const { return std::isfinite(log_norms[i][k]); }
};

inline CocycleTable cocycle_table(const SurfaceSystem& sys, const SamplePlan& plan,
                                  std::vector<int> n_list, EscapePolicy policy) {
    if (n_list.empty()) throw std::invalid_argument("n_list must be nonempty");
    for (size_t i = 0; i + 1 < n_list.size(); ++i)
        if (n_list[i + 1] <= n_list[i])
            throw std::invalid_argument("n_list must be strictly increasing");
    if (n_list.front() < 1) throw std::invalid_argument("n_list entries must be >= 1");

    CocycleTable tab;
    tab.n_list = std::move(n_list);
    tab.pts = plan.points(sys);
    tab.log_norms.assign(tab.pts.size(),
                         std::vector<double>(tab.n_list.size(),
                                             std::numeric_limits<double>::quiet_NaN()));
    const int n_max = tab.n_list.back();
    const bool enforce = policy == EscapePolicy::drop_and_count;

    parallel_for(tab.pts.size(), [&](std::size_t i) {
        Point2 x = tab.pts[i].p;
        ScaledCocycle co;
        std::size_t k = 0;
        try {
            for (int n = 1; n <= n_max && k < tab.n_list.size(); ++n) {
                co.accumulate(sys.jacobian(x));
                x = enforce ? sys.step_checked(x, n) : sys.step_unchecked(x);
                if (n == tab.n_list[k]) tab.log_norms[i][k++] = co.log_operator_norm();
            }
        } catch (const escape_error&) {
            // remaining horizons stay NaN
        }
    });
    return tab;
}

// Both averages at one horizon, reduced in fixed sample order.
inline IntegralReport reduce_report(const CocycleTable& tab, std::size_t k) {
    IntegralReport rep;
    rep.n = tab.n_list[k];
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tab.pts.size(); ++i)
        if (tab.valid(i, k)) max_log = std::max(max_log, tab.log_norms[i][k]);
    double wsum = 0.0, esum = 0.0, lsum = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < tab.pts.size(); ++i) {
        if (!tab.valid(i, k)) continue;
        const double w = tab.pts[i].weight;
        wsum += w;
        esum += w * std::exp(tab.log_norms[i][k] - max_log);
        lsum += w * tab.log_norms[i][k];
        ++kept;
    }
    rep.samples = tab.pts.size();
    rep.escapes = tab.pts.size() - kept;
    if (kept == 0) throw std::runtime_error("all samples escaped before n=" +
                                            std::to_string(rep.n));
    rep.log_of_mean = max_log + std::log(esum / wsum);
    rep.mean_of_log = lsum / wsum;
    rep.jensen_gap = rep.log_of_mean - rep.mean_of_log;
    rep.reliable = rep.escapes * 10 <= rep.samples;
    return rep;
}

}  // namespace detail

/// a_n = (1/n) log of the area-weighted mean of ||Df^n||. Jacobians are
/// accumulated incrementally along each orbit (one pass per sample point).
/// Normalizing by area shifts a_n by O(1/n) and leaves the rate untouched.
inline GrowthSeries integral_norm_growth(const SurfaceSystem& sys, const SamplePlan& plan,
                                         const std::vector<int>& n_list,
                                         EscapePolicy policy = EscapePolicy::drop_and_count) {
    const auto tab = detail::cocycle_table(sys, plan, n_list, policy);
    std::vector<SeriesEntry> entries;
    bool reliable = true;
    for (std::size_t k = 0; k < tab.n_list.size(); ++k) {
        const IntegralReport rep = detail::reduce_report(tab, k);
        reliable = reliable && rep.reliable;
        entries.push_back({rep.n, rep.log_of_mean / rep.n});
    }
    GrowthSeries s = make_series(std::move(entries), ExtrapolationMethod::linear_inv_n,
                                 sys.name + ":integral_norm");
    s.reliable = reliable;
    return s;
}

/// c_n = (1/n) area-weighted mean of log ||Df^n|| (log inside the mean).
inline GrowthSeries integral_log_norm_growth(
    const SurfaceSystem& sys, const SamplePlan& plan, const std::vector<int>& n_list,
    EscapePolicy policy = EscapePolicy::drop_and_count) {
    const auto tab = detail::cocycle_table(sys, plan, n_list, policy);
    std::vector<SeriesEntry> entries;
    bool reliable = true;
    for (std::size_t k = 0; k < tab.n_list.size(); ++k) {
        const IntegralReport rep = detail::reduce_report(tab, k);
        reliable = reliable && rep.reliable;
        entries.push_back({rep.n, rep.mean_of_log / rep.n});
    }
    GrowthSeries s = make_series(std::move(entries), ExtrapolationMethod::linear_inv_n,
                                 sys.name + ":integral_log_norm");
    s.reliable = reliable;
    return s;
}

/// Order-of-operations snapshot at one n: log of mean vs mean of log.
inline IntegralReport jensen_audit(const SurfaceSystem& sys, const SamplePlan& plan, int n,
                                   EscapePolicy policy = EscapePolicy::drop_and_count) {
    const auto tab = detail::cocycle_table(sys, plan, {n}, policy);
    return detail::reduce_report(tab, 0);
}

/// Full per-n report rows (the CSV payload of this module).
inline std::vector<IntegralReport> integral_reports(
    const SurfaceSystem& sys, const SamplePlan& plan, const std::vector<int>& n_list,
    EscapePolicy policy = EscapePolicy::drop_and_count) {
    const auto tab = detail::cocycle_table(sys, plan, n_list, policy);
    std::vector<IntegralReport> out;
    for (std::size_t k = 0; k < tab.n_list.size(); ++k)
        out.push_back(detail::reduce_report(tab, k));
    return out;
}

/// a_n at the plan's density together with a conservative quadrature error
/// estimate: twice the larger of the last two grid-doubling deltas. Doubling
/// the density once more stays within the estimate.
struct RefinementEstimate {
    double value = 0.0;           // a_n at the requested density
    double error_estimate = 0.0;  // 2 max(|a(d)-a(d/2)|, |a(d/2)-a(d/4)|)
};

inline RefinementEstimate integral_refinement_estimate(
    const SurfaceSystem& sys, const SamplePlan& plan, int n,
    EscapePolicy policy = EscapePolicy::drop_and_count) {
    auto value_at = [&](int density) {
        SamplePlan p = plan;
        p.density_per_axis = std::max(1, density);
        p.count = p.density_per_axis * p.density_per_axis;
        return jensen_audit(sys, p, n, policy).log_of_mean / n;
    };
    const double coarse2 = value_at(plan.density_per_axis / 4);
    const double coarse = value_at(plan.density_per_axis / 2);
    RefinementEstimate est;
    est.value = value_at(plan.density_per_axis);
    est.error_estimate =
        2.0 * std::max(std::fabs(est.value - coarse), std::fabs(coarse - coarse2));
    return est;
}

/// Line-integral reduction audit on a planar rectangle with identity charts:
/// the area mean of ||Df^n|| is bounded by stretched coordinate lines,
///   mean <= max_h Vol(f^n(h-line)) / height + max_v Vol(f^n(v-line)) / width.
/// Maps are evaluated by formula (no escape clipping); the built-in planar
/// systems are linear, so this is exact integrand sampling.
struct FubiniAudit {
    int n = 0;
    double lhs_mean = 0.0;
    double rhs_bound = 0.0;
    double max_hline_length = 0.0;
    double max_vline_length = 0.0;
    int lines = 0;
    bool pass = false;
};

inline FubiniAudit fubini_line_bound_audit(const SurfaceSystem& sys, int n, int line_count,
                                           const SamplePlan& plan, double tol = 1e-9,
                                           double curve_tol = 1e-7) {
    if (sys.domain != DomainKind::plane_box)
        throw std::invalid_argument("fubini audit: plane_box systems only");
    if (line_count < 1) throw std::invalid_argument("fubini audit: need lines");

    FubiniAudit audit;
    audit.n = n;
    audit.lines = line_count;

    const IntegralReport rep = jensen_audit(sys, plan, n, EscapePolicy::ignore_domain);
    audit.lhs_mean = std::exp(rep.log_of_mean);

    const Box r = plan.resolve_region(sys);
    RefineOptions ropt;
    ropt.enforce_domain = false;
    for (int i = 0; i < line_count; ++i) {
        const double v = r.vmin + (i + 0.5) * r.height() / line_count;
        const Curve h = make_segment({r.umin, v, DomainKind::plane_box},
                                     {r.umax, v, DomainKind::plane_box}, "hline");
        audit.max_hline_length =
            std::max(audit.max_hline_length, arc_length(sys, h, n, curve_tol, ropt));
        const double u = r.umin + (i + 0.5) * r.width() / line_count;
        const Curve vseg = make_segment({u, r.vmin, DomainKind::plane_box},
                                        {u, r.vmax, DomainKind::plane_box}, "vline");
        audit.max_vline_length =
            std::max(audit.max_vline_length, arc_length(sys, vseg, n, curve_tol, ropt));
    }
    audit.rhs_bound =
        audit.max_hline_length / r.height() + audit.max_vline_length / r.width();
    audit.pass = audit.lhs_mean <= audit.rhs_bound * (1.0 + tol);
    return audit;
}

/// Growth series over a subregion U against the full domain. For systems
/// with spatially constant ||Df^n|| the two rates coincide; in general the
/// gap measures how local the integral growth is.
struct LocalityAudit {
    GrowthSeries sub;
    GrowthSeries full;
    double rate_gap = 0.0;
};

inline LocalityAudit locality_audit(const SurfaceSystem& sys, const SamplePlan& plan,
                                    const std::vector<int>& n_list, const Box& subregion,
                                    EscapePolicy policy = EscapePolicy::drop_and_count) {
    if (!(subregion.area() > 0))
        throw std::invalid_argument("locality audit: subregion must have positive area");
    SamplePlan sub = plan;
    sub.region = subregion;
    LocalityAudit audit;
    audit.sub = integral_norm_growth(sys, sub, n_list, policy);
    audit.full = integral_norm_growth(sys, plan, n_list, policy);
    audit.rate_gap =
        std::fabs(audit.sub.extrapolated_rate - audit.full.extrapolated_rate);
    return audit;
}

}  // namespace volgrow
