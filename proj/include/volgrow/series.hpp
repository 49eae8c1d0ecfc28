#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace volgrow {

enum class ExtrapolationMethod {
    linear_inv_n,   // least-squares fit a_n = rate + beta/n over the largest half of n
    fekete_min,     // subadditive sequences: rate = min over computed n of a_n
    log_slope,      // rate = least-squares slope of n*a_n against n (counting estimators)
};

struct SeriesEntry {
    int n = 0;
    double value = 0.0;   // nats per iteration
};

/// A sequence a_n of normalized log-quantities together with an extrapolated
/// limit and convergence diagnostics. Every estimator in the toolkit reports
/// one of these.
struct GrowthSeries {
    std::vector<SeriesEntry> entries;          // strictly increasing n
    double extrapolated_rate = 0.0;
    ExtrapolationMethod method = ExtrapolationMethod::linear_inv_n;
    double fit_intercept = 0.0;                // from the 1/n fit (always reported)
    double fit_slope = 0.0;
    double fit_residual_rms = 0.0;
    double cauchy_rate = 0.0;                  // (n a_n - m a_m)/(n - m), two largest n
    bool reliable = true;
    std::string label;
};

namespace detail {

// Least squares y = p + q*x. Returns {p, q, rms residual}.
inline void least_squares(const std::vector<double>& x, const std::vector<double>& y,
                          double& p, double& q, double& rms) {
    const size_t n = x.size();
    if (n == 0) { p = q = rms = 0.0; return; }
    if (n == 1) { p = y[0]; q = 0.0; rms = 0.0; return; }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::fabs(denom) < 1e-300) { p = sy / n; q = 0.0; rms = 0.0; return; }
    q = (n * sxy - sx * sy) / denom;
    p = (sy - q * sx) / n;
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - (p + q * x[i]);
        ss += r * r;
    }
    rms = std::sqrt(ss / n);
}

}  // namespace detail

/// Assemble a GrowthSeries from raw entries. The 1/n fit uses the largest
/// half of the computed n (the leading corrections of all our limits are
/// O(1/n)); the Cauchy difference uses the two largest n as an independent
/// second read.
inline GrowthSeries make_series(std::vector<SeriesEntry> entries,
                                ExtrapolationMethod method,
                                std::string label = {}) {
    for (size_t i = 0; i + 1 < entries.size(); ++i)
        if (entries[i + 1].n <= entries[i].n)
            throw std::invalid_argument("series entries must have strictly increasing n");
    for (const auto& e : entries)
        if (!std::isfinite(e.value))
            throw std::invalid_argument("series value not finite at n=" + std::to_string(e.n));

    GrowthSeries s;
    s.entries = std::move(entries);
    s.method = method;
    s.label = std::move(label);
    if (s.entries.empty()) return s;

    const size_t m = s.entries.size();
    const size_t lo = m / 2;  // largest half
    std::vector<double> xs, ys;
    for (size_t i = lo; i < m; ++i) {
        xs.push_back(1.0 / s.entries[i].n);
        ys.push_back(s.entries[i].value);
    }
    detail::least_squares(xs, ys, s.fit_intercept, s.fit_slope, s.fit_residual_rms);

    if (m >= 2) {
        const auto& p = s.entries[m - 2];
        const auto& q = s.entries[m - 1];
        s.cauchy_rate = (q.n * q.value - p.n * p.value) / double(q.n - p.n);
    } else {
        s.cauchy_rate = s.entries.back().value;
    }

    switch (method) {
        case ExtrapolationMethod::linear_inv_n:
            s.extrapolated_rate = s.fit_intercept;
            break;
        case ExtrapolationMethod::fekete_min: {
            double mn = s.entries.front().value;
            for (const auto& e : s.entries) mn = std::min(mn, e.value);
            s.extrapolated_rate = mn;
            break;
        }
        case ExtrapolationMethod::log_slope: {
            // slope of log-counts n*a_n vs n over the largest half
            std::vector<double> ns, ls;
            for (size_t i = lo; i < m; ++i) {
                ns.push_back(double(s.entries[i].n));
                ls.push_back(s.entries[i].n * s.entries[i].value);
            }
            double p, q, r;
            detail::least_squares(ns, ls, p, q, r);
            s.extrapolated_rate = q;
            break;
        }
    }
    return s;
}

}  // namespace volgrow
