#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "volgrow/geometry.hpp"
#include "volgrow/parallel.hpp"
#include "volgrow/sampling.hpp"
#include "volgrow/series.hpp"
#include "volgrow/system.hpp"

namespace volgrow {

/// (center, n, eps) triple naming a dynamical ball B(x, n, eps).
struct BallSpec {
    Point2 center;
    int n = 1;
    double eps = 0.1;
};

/// y lies in B(center, n, eps) iff the first n iterates stay eps-close.
/// Plane orbits that escape the domain count as outside.
inline bool in_dynamical_ball(const SurfaceSystem& sys, const Point2& center,
                              const Point2& y, int n, double eps) {
    if (n < 1) throw std::invalid_argument("in_dynamical_ball: n must be >= 1");
    Point2 a = canonical(center), b = canonical(y);
    try {
        for (int k = 0; k < n; ++k) {
            if (!(distance(a, b) < eps)) return false;
            if (k + 1 < n) {
                a = sys.step_checked(a, k + 1);
                b = sys.step_checked(b, k + 1);
            }
        }
    } catch (const escape_error&) {
        return false;
    }
    return true;
}

namespace detail {

// Static-position buckets with cell size >= eps: points closer than eps in
// any dynamical metric are closer than eps at step 0, hence in adjacent
// buckets. Torus buckets wrap, plane buckets clamp.
struct EpsBuckets {
    bool torus = true;
    double ou = 0.0, ov = 0.0;
    double cu_size = 1.0, cv_size = 1.0;
    int wu = 1, wv = 1;
    std::vector<std::vector<std::uint32_t>> cells;

    EpsBuckets(const SurfaceSystem& sys, double eps) {
        torus = sys.domain == DomainKind::torus;
        ou = torus ? 0.0 : sys.box.umin;
        ov = torus ? 0.0 : sys.box.vmin;
        const double eu = torus ? 1.0 : sys.box.width();
        const double ev = torus ? 1.0 : sys.box.height();
        wu = std::max(1, int(std::floor(eu / eps)));
        wv = std::max(1, int(std::floor(ev / eps)));
        cu_size = eu / wu;
        cv_size = ev / wv;
        cells.assign(std::size_t(wu) * wv, {});
    }

    std::size_t index(int cu, int cv) const {
        if (torus) {
            cu = ((cu % wu) + wu) % wu;
            cv = ((cv % wv) + wv) % wv;
        } else {
            cu = std::clamp(cu, 0, wu - 1);
            cv = std::clamp(cv, 0, wv - 1);
        }
        return std::size_t(cu) * wv + cv;
    }
    std::pair<int, int> cell_of(const Point2& p) const {
        return {int(std::floor((p.u - ou) / cu_size)),
                int(std::floor((p.v - ov) / cv_size))};
    }
    void insert(const Point2& p, std::uint32_t id) {
        auto [cu, cv] = cell_of(p);
        cells[index(cu, cv)].push_back(id);
    }
    template <class Fn>
    void for_neighbors(const Point2& p, Fn&& fn) const {
        auto [cu, cv] = cell_of(p);
        std::size_t seen[9];
        int ns = 0;
        for (int du = -1; du <= 1; ++du) {
            for (int dv = -1; dv <= 1; ++dv) {
                const std::size_t b = index(cu + du, cv + dv);
                bool dup = false;
                for (int s = 0; s < ns; ++s) dup = dup || seen[s] == b;
                if (dup) continue;
                seen[ns++] = b;
                for (std::uint32_t id : cells[b]) fn(id);
            }
        }
    }
};

// Orbits of the candidate cloud, laid out flat; escaped tails are truncated.
struct OrbitCloud {
    int n = 0;
    std::vector<Point2> pts;        // cloud points (canonical)
    std::vector<Point2> orbit;      // [i * n + k] = f^k(pts[i])
    std::vector<int> alive_steps;   // how many of the n steps stayed in-domain

    const Point2& at(std::size_t i, int k) const { return orbit[i * n + k]; }
};

inline OrbitCloud make_orbit_cloud(const SurfaceSystem& sys,
                                   const std::vector<Point2>& cloud, int n) {
    OrbitCloud oc;
    oc.n = n;
    oc.pts.reserve(cloud.size());
    for (const auto& p : cloud) oc.pts.push_back(canonical(p));
    oc.orbit.resize(cloud.size() * std::size_t(n));
    oc.alive_steps.assign(cloud.size(), n);
    for (std::size_t i = 0; i < oc.pts.size(); ++i) {
        Point2 x = oc.pts[i];
        for (int k = 0; k < n; ++k) {
            oc.orbit[i * n + k] = x;
            if (k + 1 < n) {
                try {
                    x = sys.step_checked(x, k + 1);
                } catch (const escape_error&) {
                    oc.alive_steps[i] = k + 1;
                    break;
                }
            }
        }
    }
    return oc;
}

// Dynamical distance decision with early exit: true iff some step separates
// the pair by more than eps. Escaped tails separate by convention.
inline bool separated_pair(const OrbitCloud& oc, std::size_t i, std::size_t j, double eps) {
    const int steps = std::min(oc.alive_steps[i], oc.alive_steps[j]);
    for (int k = 0; k < steps; ++k)
        if (distance(oc.at(i, k), oc.at(j, k)) > eps) return true;
    return steps < oc.n;
}

}  // namespace detail

/// Greedily built (n, eps)-separated set: candidates are scanned in cloud
/// order and inserted whenever they separate from everything accepted so
/// far. The result is maximal within the cloud.
struct SeparatedSet {
    std::vector<Point2> points;
    std::vector<std::size_t> insertion_order;  // indices into the candidate cloud
    int n = 1;
    double eps = 0.1;
};

inline SeparatedSet greedy_separated_set(const SurfaceSystem& sys,
                                         const std::vector<Point2>& cloud, int n,
                                         double eps) {
    if (cloud.empty()) throw std::invalid_argument("greedy_separated_set: empty cloud");
    const auto oc = detail::make_orbit_cloud(sys, cloud, n);
    SeparatedSet out;
    out.n = n;
    out.eps = eps;
    // only accepted points statically eps-close to the candidate can fail to
    // separate from it, so it suffices to scan the neighbor buckets
    detail::EpsBuckets buckets(sys, eps);
    for (std::size_t i = 0; i < oc.pts.size(); ++i) {
        bool ok = true;
        buckets.for_neighbors(oc.pts[i], [&](std::uint32_t j) {
            if (ok && !detail::separated_pair(oc, i, j, eps)) ok = false;
        });
        if (ok) {
            buckets.insert(oc.pts[i], std::uint32_t(i));
            out.points.push_back(oc.pts[i]);
            out.insertion_order.push_back(i);
        }
    }
    return out;
}

/// Exhaustive pairwise re-check of a separated set (O(k^2 n), exact).
inline bool verify_separated(const SurfaceSystem& sys, const SeparatedSet& s) {
    const auto oc = detail::make_orbit_cloud(sys, s.points, s.n);
    for (std::size_t i = 0; i < s.points.size(); ++i)
        for (std::size_t j = i + 1; j < s.points.size(); ++j)
            if (!detail::separated_pair(oc, i, j, s.eps)) return false;
    return true;
}

/// Greedy cover of the cloud by dynamical balls: repeatedly pick the cloud
/// point whose ball covers the most uncovered cloud points (lowest index on
/// ties). The cardinality is an upper-bound surrogate for the minimal
/// spanning count at the cloud's resolution.
inline std::vector<Point2> greedy_spanning_set(const SurfaceSystem& sys,
                                               const std::vector<Point2>& cloud, int n,
                                               double eps,
                                               std::size_t adjacency_budget = 200'000'000) {
    if (cloud.empty()) throw std::invalid_argument("greedy_spanning_set: empty cloud");
    const auto oc = detail::make_orbit_cloud(sys, cloud, n);
    const std::size_t m = oc.pts.size();

    // ball membership requires static eps-closeness, so neighbor buckets
    // enumerate every candidate pair
    std::vector<std::vector<std::uint32_t>> ball(m);  // ball[i]: points covered by i
    {
        detail::EpsBuckets buckets(sys, eps);
        for (std::size_t i = 0; i < m; ++i) buckets.insert(oc.pts[i], std::uint32_t(i));
        std::size_t total = 0;
        for (std::size_t i = 0; i < m; ++i) {
            buckets.for_neighbors(oc.pts[i], [&](std::uint32_t j) {
                if (!detail::separated_pair(oc, i, j, eps)) ball[i].push_back(j);
            });
            std::sort(ball[i].begin(), ball[i].end());
            total += ball[i].size();
            if (total > adjacency_budget)
                throw std::runtime_error(
                    "greedy_spanning_set: cloud too dense at this eps, reduce the grid");
        }
    }

    std::vector<bool> covered(m, false);
    std::vector<int> gain(m, 0);
    for (std::size_t i = 0; i < m; ++i) gain[i] = int(ball[i].size());
    std::size_t remaining = m;
    std::vector<Point2> out;
    while (remaining > 0) {
        std::size_t best = m;
        int best_gain = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (gain[i] > best_gain) {
                best_gain = gain[i];
                best = i;
            }
        }
        if (best == m)
            throw std::runtime_error("greedy_spanning_set: cover stalled with " +
                                     std::to_string(remaining) + " points uncovered");
        out.push_back(oc.pts[best]);
        for (std::uint32_t j : ball[best]) {
            if (covered[j]) continue;
            covered[j] = true;
            --remaining;
            for (std::uint32_t i2 : ball[j]) --gain[i2];  // ball relation is symmetric
        }
    }
    return out;
}

/// Katok-style lower-bound estimate: for each eps, the least-squares slope of
/// log #separated(n, eps) against n over the largest half of the computed n.
/// The headline estimate is the slope at the smallest eps.
struct KatokEstimate {
    std::vector<double> eps_list;
    std::vector<GrowthSeries> per_eps;       // entries (n, (1/n) log count)
    std::vector<std::vector<std::size_t>> counts;
    double headline_rate = 0.0;              // slope at the smallest eps
};

inline KatokEstimate katok_estimate(const SurfaceSystem& sys,
                                    const std::vector<Point2>& cloud,
                                    const std::vector<int>& n_list,
                                    const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw std::invalid_argument("katok_estimate: empty eps list");
    for (size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (!(eps_list[i + 1] < eps_list[i]))
            throw std::invalid_argument("katok_estimate: eps list must decrease");
    KatokEstimate est;
    est.eps_list = eps_list;
    for (double eps : eps_list) {
        std::vector<SeriesEntry> entries;
        std::vector<std::size_t> row;
        for (int n : n_list) {
            const auto s = greedy_separated_set(sys, cloud, n, eps);
            row.push_back(s.points.size());
            entries.push_back({n, std::log(double(s.points.size())) / n});
        }
        est.counts.push_back(row);
        est.per_eps.push_back(make_series(std::move(entries), ExtrapolationMethod::log_slope,
                                          sys.name + ":katok:eps=" + std::to_string(eps)));
    }
    est.headline_rate = est.per_eps.back().extrapolated_rate;
    return est;
}

/// Ball-integral audit: I(z, n) = area-weighted sum of ||Df^n_x|| over plan
/// samples inside B(z, n, eps), integrated on an eps-window centered at z so
/// the shrinking balls stay resolved. The empirical envelope
/// min_z I(z, n) 2^n / eps^2 tracks the constant of the ball-integral lower
/// bound; for hyperbolic testbeds it must stay positive and grow.
struct BallIntegralRow {
    BallSpec ball;
    double integral = 0.0;       // I(z, n)
    double scaled = 0.0;         // I(z, n) * 2^n / eps^2
    std::size_t samples_in_ball = 0;
    bool resolved = true;        // false when the ball caught no samples
};

struct BallIntegralAudit {
    std::vector<BallIntegralRow> rows;
    std::vector<double> envelope;  // per n: min over z of scaled (resolved rows)
    std::vector<int> n_list;
    double eps = 0.0;
};

inline BallIntegralAudit ball_integral_audit(const SurfaceSystem& sys,
                                      const std::vector<Point2>& z_list,
                                      const std::vector<int>& n_list, double eps,
                                      const SamplePlan& plan) {
    if (z_list.empty()) throw std::invalid_argument("ball_integral_audit: empty z list");
    if (!(eps > 0)) throw std::invalid_argument("ball_integral_audit: eps must be positive");
    BallIntegralAudit audit;
    audit.eps = eps;
    audit.n_list = n_list;
    const int n_max = *std::max_element(n_list.begin(), n_list.end());

    std::vector<std::vector<double>> scaled_by_n(n_list.size());
    for (const auto& z0 : z_list) {
        const Point2 z = canonical(z0);
        SamplePlan window = plan;
        window.region = Box{z.u - eps, z.u + eps, z.v - eps, z.v + eps};
        const auto pts = window.points(sys);

        // one orbit pass per sample: membership is monotone in n, so record
        // the first step that exits and the running log ||Df^n||
        std::vector<int> exit_step(pts.size(), n_max);
        std::vector<std::vector<double>> lognorm(pts.size());
        parallel_for(pts.size(), [&](std::size_t i) {
            lognorm[i].assign(n_list.size(), 0.0);
            Point2 a = z, b = pts[i].p;
            if (!sys.in_domain(b)) {
                exit_step[i] = 0;
                return;
            }
            ScaledCocycle co;
            std::size_t k = 0;
            for (int step = 0; step < n_max; ++step) {
                if (!(distance(a, b) < eps)) {
                    exit_step[i] = step;
                    break;
                }
                co.accumulate(sys.jacobian(b));
                while (k < n_list.size() && n_list[k] == step + 1) {
                    lognorm[i][k] = co.log_operator_norm();
                    ++k;
                }
                if (step + 1 < n_max) {
                    try {
                        a = sys.step_unchecked(a);
                        b = sys.step_checked(b, step + 1);
                    } catch (const escape_error&) {
                        exit_step[i] = step + 1;
                        break;
                    }
                }
            }
        });

        for (std::size_t k = 0; k < n_list.size(); ++k) {
            BallIntegralRow row;
            row.ball = {z, n_list[k], eps};
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (exit_step[i] >= n_list[k]) {
                    acc += pts[i].weight * std::exp(lognorm[i][k]);
                    ++cnt;
                }
            }
            row.samples_in_ball = cnt;
            row.resolved = cnt > 0;
            row.integral = acc;
            row.scaled = acc * std::pow(2.0, n_list[k]) / (eps * eps);
            if (row.resolved) scaled_by_n[k].push_back(row.scaled);
            audit.rows.push_back(row);
        }
    }
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        double mn = std::numeric_limits<double>::infinity();
        for (double v : scaled_by_n[k]) mn = std::min(mn, v);
        audit.envelope.push_back(scaled_by_n[k].empty() ? 0.0 : mn);
    }
    return audit;
}

}  // namespace volgrow
