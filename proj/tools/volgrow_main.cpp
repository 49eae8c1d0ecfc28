// Command-line front door: pick a system, estimators, horizons and sampling;
// emit CSV series and a JSON summary. All outputs are deterministic for a
// fixed config and seed, independent of --threads.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "volgrow/cocycle_integral.hpp"
#include "volgrow/curve.hpp"
#include "volgrow/entropy_bounds.hpp"
#include "volgrow/io.hpp"
#include "volgrow/oscillator.hpp"
#include "volgrow/parallel.hpp"
#include "volgrow/selftest.hpp"
#include "volgrow/systems.hpp"
#include "volgrow/time_decomposition.hpp"

using nlohmann::json;
using namespace volgrow;

namespace {

std::vector<int> parse_n_range(const std::string& spec) {
    // "start..end[:step]" or a single integer
    std::vector<int> out;
    const auto dots = spec.find("..");
    if (dots == std::string::npos) {
        out.push_back(std::stoi(spec));
        return out;
    }
    const int lo = std::stoi(spec.substr(0, dots));
    std::string rest = spec.substr(dots + 2);
    int step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
        step = std::stoi(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
    }
    const int hi = std::stoi(rest);
    if (lo < 1 || hi < lo || step < 1)
        throw std::invalid_argument("invalid n range: " + spec);
    for (int n = lo; n <= hi; n += step) out.push_back(n);
    return out;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, double> out;
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("param must be key=value: " + kv);
        out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return out;
}

Curve parse_curve(const std::string& spec, DomainKind domain) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto split = [](const std::string& s) {
        std::vector<double> vals;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        return vals;
    };
    if (kind == "hline") return make_horizontal_loop(args.empty() ? 0.37 : std::stod(args));
    if (kind == "vline") return make_vertical_loop(args.empty() ? 0.37 : std::stod(args));
    if (kind == "osc") return make_osc_curve();
    if (kind == "segment") {
        const auto v = split(args);
        if (v.size() != 4)
            throw std::invalid_argument("segment needs x0,y0,x1,y1: " + spec);
        return make_segment({v[0], v[1], domain}, {v[2], v[3], domain});
    }
    throw std::invalid_argument("unknown curve spec: " + spec);
}

std::optional<Box> parse_region(const std::string& spec) {
    if (spec.empty()) return std::nullopt;
    std::vector<double> v;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != 4) throw std::invalid_argument("region needs umin,umax,vmin,vmax");
    return Box{v[0], v[1], v[2], v[3]};
}

json series_json(const GrowthSeries& s) {
    json entries = json::array();
    for (const auto& e : s.entries) entries.push_back({e.n, e.value});
    return {{"rate", s.extrapolated_rate},
            {"method", method_name(s.method)},
            {"fit_intercept", s.fit_intercept},
            {"fit_slope", s.fit_slope},
            {"fit_residual_rms", s.fit_residual_rms},
            {"cauchy_rate", s.cauchy_rate},
            {"reliable", s.reliable},
            {"entries", entries}};
}

/// Routes named outputs either to files under --out or to stdout.
struct Emitter {
    std::string out_dir;

    void emit(const std::string& name, const std::string& payload) const {
        if (out_dir.empty()) {
            std::cout << "# ---- " << name << " ----\n" << payload;
            if (payload.empty() || payload.back() != '\n') std::cout << '\n';
            return;
        }
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        std::ofstream file(fs::path(out_dir) / name);
        if (!file) throw std::invalid_argument("unwritable output path: " + out_dir);
        file << payload;
    }
};

struct CommonOpts {
    std::string system = "cat";
    std::vector<std::string> params;
    std::string out_dir;
    std::uint64_t seed = 1;

    json config_echo(const json& extra) const {
        json cfg{{"system", system}, {"seed", seed}};
        for (const auto& kv : parse_params(params)) cfg["params"][kv.first] = kv.second;
        for (auto it = extra.begin(); it != extra.end(); ++it) cfg[it.key()] = it.value();
        return cfg;
    }
};

int run_estimate(const CommonOpts& common, const std::vector<std::string>& methods,
                 const std::string& n_spec, int grid, const std::string& scheme,
                 const std::vector<double>& eps_list, const std::string& curve_spec,
                 double tol, const std::string& region_spec, bool dump_polyline) {
    auto sys = make_system(common.system, parse_params(common.params));
    const auto n_list = parse_n_range(n_spec);
    Emitter out{common.out_dir};

    SamplePlan plan;
    plan.density_per_axis = grid;
    plan.count = grid * grid;
    plan.seed = common.seed;
    plan.scheme = scheme == "stratified" ? SampleScheme::stratified_random
                                         : SampleScheme::uniform_grid;
    plan.region = parse_region(region_spec);

    json results;
    for (const auto& method : methods) {
        if (method == "cocycle") {
            const auto rows = integral_reports(sys, plan, n_list);
            std::ostringstream csv;
            csv << "n,log_of_mean,mean_of_log,jensen_gap,samples,escapes\n";
            std::vector<SeriesEntry> entries;
            for (const auto& r : rows) {
                csv << r.n << "," << fmt_g17(r.log_of_mean) << "," << fmt_g17(r.mean_of_log)
                    << "," << fmt_g17(r.jensen_gap) << "," << r.samples << "," << r.escapes
                    << "\n";
                entries.push_back({r.n, r.log_of_mean / r.n});
            }
            out.emit("cocycle.csv", csv.str());
            results["cocycle"] = series_json(make_series(
                entries, ExtrapolationMethod::linear_inv_n, sys.name + ":integral_norm"));
        } else if (method == "curve") {
            const Curve curve = parse_curve(curve_spec, sys.domain);
            const auto s = curve_growth_series(sys, curve, n_list, tol);
            std::ostringstream csv;
            write_series_csv(csv, s);
            out.emit("curve.csv", csv.str());
            if (dump_polyline) {
                RefineOptions ropt;
                ropt.keep_polyline = true;
                const auto detail =
                    arc_length_detail(sys, curve, n_list.back(), tol, ropt);
                std::ostringstream pcsv;
                write_polyline_csv(pcsv, detail.polyline);
                out.emit("polyline.csv", pcsv.str());
            }
            results["curve"] = series_json(s);
        } else if (method == "katok") {
            std::vector<Point2> cloud;
            for (const auto& wp : plan.points(sys)) cloud.push_back(wp.p);
            const auto kat = katok_estimate(sys, cloud, n_list, eps_list);
            std::ostringstream csv;
            csv << "eps,n,separated_count,spanning_count,katok_slope\n";
            for (size_t e = 0; e < kat.eps_list.size(); ++e) {
                for (size_t k = 0; k < n_list.size(); ++k) {
                    const auto span =
                        greedy_spanning_set(sys, cloud, n_list[k], eps_list[e]);
                    csv << fmt_g17(kat.eps_list[e]) << "," << n_list[k] << ","
                        << kat.counts[e][k] << "," << span.size() << ","
                        << fmt_g17(kat.per_eps[e].extrapolated_rate) << "\n";
                }
            }
            out.emit("katok.csv", csv.str());
            json per;
            for (size_t e = 0; e < kat.eps_list.size(); ++e)
                per.push_back({{"eps", kat.eps_list[e]},
                               {"slope", kat.per_eps[e].extrapolated_rate}});
            results["katok"] = {{"headline_rate", kat.headline_rate}, {"per_eps", per}};
        } else {
            throw std::invalid_argument("unknown method: " + method);
        }
    }

    // reference values: cached entropy where known, a lambda+ estimate always
    std::vector<Point2> ref_grid;
    for (int i = 0; i < 24; ++i)
        for (int j = 0; j < 24; ++j) {
            Point2 p{(i + 0.5) / 24.0, (j + 0.5) / 24.0, sys.domain};
            if (sys.domain == DomainKind::plane_box) {
                p.u = sys.box.umin + (i + 0.5) * sys.box.width() / 24.0;
                p.v = sys.box.vmin + (j + 0.5) * sys.box.height() / 24.0;
            }
            ref_grid.push_back(p);
        }
    const auto lam = lambda_plus_series(sys, ref_grid, std::min(16, n_list.back()));
    const double yomdin = lam.extrapolated_rate / sys.smoothness_order;

    double h_est = 0.0;
    bool have_h = false;
    for (const auto& key : {"cocycle", "curve"}) {
        if (results.contains(key)) {
            h_est = results[key]["rate"].get<double>();
            have_h = true;
            break;
        }
    }
    if (!have_h && results.contains("katok")) {
        h_est = results["katok"]["headline_rate"].get<double>();
        have_h = true;
    }

    json summary{{"command", "estimate"},
                 {"config", common.config_echo({{"methods", methods},
                                                {"n", n_spec},
                                                {"grid", grid},
                                                {"scheme", scheme},
                                                {"eps", eps_list},
                                                {"curve", curve_spec},
                                                {"tol", tol},
                                                {"region", region_spec}})},
                 {"results", results},
                 {"references",
                  {{"known_entropy",
                    sys.known_entropy ? json(*sys.known_entropy) : json(nullptr)},
                   {"lambda_plus_estimate", lam.extrapolated_rate},
                   {"smoothness_order", sys.smoothness_order},
                   {"yomdin_term", yomdin}}},
                 {"entropy_ge_yomdin_term", have_h && h_est >= yomdin}};
    out.emit("summary.json", summary.dump(2) + "\n");
    return 0;
}

int run_diagnose(const CommonOpts& common, const std::string& point_spec, double angle,
                 int n, int L, int p, double tau, double radius,
                 const std::string& curve_spec, double ref_h, double ref_lambda) {
    auto sys = make_system(common.system, parse_params(common.params));
    Emitter out{common.out_dir};

    std::vector<double> pt;
    {
        std::stringstream ss(point_spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) pt.push_back(std::stod(tok));
        if (pt.size() != 2) throw std::invalid_argument("point needs u,v");
    }
    TimeOptions topt;
    topt.tau = tau;
    topt.expand_L = L;
    const TangentPoint xv{{pt[0], pt[1], sys.domain}, reduce_angle_mod_pi(angle)};
    const auto prof = build_orbit_profile(sys, xv, n, topt, radius);
    const auto quant = quantized_data(sys, xv, n, p);

    std::vector<bool> geo(n + 1, false), exp_l(n + 1, false);
    for (int g : prof.geometric) geo[g] = true;
    for (int g : prof.expanded) exp_l[g] = true;

    std::ostringstream csv;
    csv << "i,rho,rho_prime,is_geometric,in_E_L,beta_prime,beta_double_prime\n";
    for (int i = 0; i < n; ++i) {
        // time labels: step i+1 is geometric when the window test passes there
        csv << i << "," << fmt_g17(prof.rho_vals[i]) << ","
            << fmt_g17(prof.rho_prime_vals[i]) << "," << (geo[i + 1] ? 1 : 0) << ","
            << (exp_l[i + 1] ? 1 : 0) << "," << fmt_g17(quant.beta_prime[i]) << ","
            << fmt_g17(quant.beta_double_prime[i]) << "\n";
    }
    out.emit("profile.csv", csv.str());

    json summary{{"command", "diagnose-times"},
                 {"config", common.config_echo({{"point", point_spec},
                                                {"angle", angle},
                                                {"n", n},
                                                {"L", L},
                                                {"p", p},
                                                {"tau", tau},
                                                {"curve", curve_spec}})},
                 {"geometric_count", prof.geometric.size()},
                 {"expanded_count", prof.expanded.size()},
                 {"trapping_time", prof.trapping},
                 {"alpha_fraction", alpha_fraction(prof.expanded, prof.trapping, n)},
                 {"gap_audit_pass", geometric_gap_audit(prof)}};

    if (!curve_spec.empty()) {
        const Curve curve = parse_curve(curve_spec, sys.domain);
        const auto rep = convex_split_report(sys, curve, n, L, ref_h, ref_lambda, topt);
        summary["convex_split"] = {{"measured_growth", rep.measured_growth},
                                   {"alpha_mean", rep.alpha_mean},
                                   {"convex_bound", rep.convex_bound},
                                   {"yomdin_term", rep.yomdin_term},
                                   {"residual", rep.residual}};
    }
    out.emit("summary.json", summary.dump(2) + "\n");
    return 0;
}

int run_verify_example(const CommonOpts& common, double a, const std::string& n_spec,
                       double tol) {
    Emitter out{common.out_dir};
    const auto n_list = parse_n_range(n_spec);
    const auto growth = restricted_growth(a, n_list, tol);

    std::ostringstream csv;
    csv << "a,n,length,value,theoretical_rate,residual\n";
    for (const auto& row : growth.rows)
        csv << fmt_g17(a) << "," << row.n << "," << fmt_g17(row.length) << ","
            << fmt_g17(row.value) << "," << fmt_g17(theoretical_rate(a)) << ","
            << fmt_g17(row.value - theoretical_rate(a)) << "\n";
    out.emit("example.csv", csv.str());

    bool cos_pass = true;
    json cos_rows = json::array();
    for (double ca : {1.1, 1.5, 2.0}) {
        for (double b : {0.5, 1.0}) {
            for (int n = 1; n <= 6; ++n) {
                const auto audit = cos_integral_audit(ca, b, n);
                cos_pass = cos_pass && audit.pass;
                cos_rows.push_back({{"a", ca},
                                    {"b", b},
                                    {"n", n},
                                    {"numeric", audit.numeric},
                                    {"bound", audit.bound},
                                    {"pass", audit.pass}});
            }
        }
    }

    json mono = json::array();
    if (a <= std::exp(std::log(3.0) / 5.0)) {
        for (int n : {5, 10}) {
            const auto audit = monotonicity_count_audit(a, n);
            mono.push_back({{"n", n},
                            {"count", audit.numeric_count},
                            {"bound", audit.branch_count_bound},
                            {"pass", audit.pass}});
        }
    }

    json summary{
        {"command", "verify-example"},
        {"config", common.config_echo({{"a", a}, {"n", n_spec}, {"tol", tol}})},
        {"growth", series_json(growth.series)},
        {"theoretical_rate", theoretical_rate(a)},
        {"rate_residual", growth.series.extrapolated_rate - theoretical_rate(a)},
        {"cos_integral_sweep_pass", cos_pass},
        {"cos_integral_rows", cos_rows},
        {"monotonicity_audits", mono}};
    out.emit("summary.json", summary.dump(2) + "\n");
    return 0;
}

int run_decompose(const CommonOpts& common, double eps, const std::string& curve_spec) {
    Emitter out{common.out_dir};
    auto sys = make_system(common.system, parse_params(common.params));
    const Curve curve = curve_spec.empty()
                            ? make_segment({0.1, 0.2, sys.domain}, {0.66, 0.76, sys.domain})
                            : parse_curve(curve_spec, sys.domain);
    const auto pieces = decompose_eps_bounded(curve, eps);
    const double delta = 1.0 / double(pieces.size());

    std::ostringstream csv;
    csv << "piece,b,delta,sup_d1,eps_bounded\n";
    for (size_t j = 0; j < pieces.size(); ++j) {
        const double b = (j + 1 < pieces.size()) ? j * delta : 1.0 - delta;
        const auto rep = boundedness_report(pieces[j]);
        csv << (j + 1) << "," << fmt_g17(b) << "," << fmt_g17(delta) << ","
            << fmt_g17(rep.sup_d1) << ","
            << (is_eps_bounded(pieces[j], eps) ? 1 : 0) << "\n";
    }
    out.emit("pieces.csv", csv.str());

    json summary{{"command", "decompose-curve"},
                 {"config", common.config_echo({{"eps", eps}, {"curve", curve_spec}})},
                 {"piece_count", pieces.size()},
                 {"delta", delta}};
    out.emit("summary.json", summary.dump(2) + "\n");
    return 0;
}

int run_selftest_cmd(const CommonOpts& common) {
    Emitter out{common.out_dir};
    const auto results = run_selftest();
    std::ostringstream csv;
    csv << "check,pass,detail\n";
    bool all = true;
    for (const auto& r : results) {
        csv << r.name << "," << (r.pass ? 1 : 0) << "," << r.detail << "\n";
        all = all && r.pass;
    }
    csv << "total," << (all ? 1 : 0) << "," << results.size() << " checks\n";
    out.emit("selftest.csv", csv.str());
    return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"volume-growth entropy toolkit for surface diffeomorphisms"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value file; dotted keys reach subcommands");

    int threads = 1;
    app.add_option("--threads", threads, "worker threads (never changes results)");

    CommonOpts common;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--system", common.system, "system name");
        cmd->add_option("--params", common.params, "system parameters k=v");
        cmd->add_option("--out", common.out_dir, "output directory (default stdout)");
        cmd->add_option("--seed", common.seed, "sampling seed");
    };

    // estimate
    auto* est = app.add_subcommand("estimate", "growth-rate estimators");
    std::vector<std::string> methods{"cocycle"};
    std::string n_spec = "1..20";
    int grid = 64;
    std::string scheme = "grid";
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    std::string curve_spec = "hline:0.37";
    double tol = 1e-4;
    std::string region_spec;
    add_common(est);
    est->add_option("--method", methods, "cocycle, curve, katok (repeatable)");
    est->add_option("--n", n_spec, "horizons start..end[:step]");
    est->add_option("--grid", grid, "samples per axis");
    est->add_option("--scheme", scheme)->check(CLI::IsMember({"grid", "stratified"}));
    est->add_option("--eps", eps_list, "katok scales, decreasing");
    est->add_option("--curve", curve_spec, "hline:v | vline:u | segment:x0,y0,x1,y1 | osc");
    est->add_option("--tol", tol, "curve refinement tolerance");
    est->add_option("--region", region_spec, "umin,umax,vmin,vmax");
    bool dump_polyline = false;
    est->add_flag("--polyline", dump_polyline, "also export the refined polyline at max n");

    // diagnose-times
    auto* diag = app.add_subcommand("diagnose-times", "orbit-level time decomposition");
    std::string point_spec = "0.123,0.456";
    double angle = 0.0, tau = 1.0, radius = -1.0, ref_h = 0.0, ref_lambda = 0.0;
    int diag_n = 50, diag_L = 3, diag_p = 1;
    std::string diag_curve;
    add_common(diag);
    diag->add_option("--point", point_spec, "orbit start u,v");
    diag->add_option("--angle", angle, "initial direction (radians, mod pi)");
    diag->add_option("--n", diag_n, "horizon");
    diag->add_option("--L", diag_L, "geometric-time expansion width");
    diag->add_option("--p", diag_p, "quantization block length");
    diag->add_option("--tau", tau, "geometric-time threshold");
    diag->add_option("--radius", radius, "trapping-ball radius (default eps_cfg/100||Df||)");
    diag->add_option("--curve", diag_curve, "also emit the convex-split report");
    diag->add_option("--ref-h", ref_h, "reference entropy for the split");
    diag->add_option("--ref-lambda", ref_lambda, "reference lambda+ for the split");

    // verify-example
    auto* ver = app.add_subcommand("verify-example", "oscillating-curve testbed");
    double ex_a = 1.5;
    std::string ex_n = "1..20";
    double ex_tol = 1e-4;
    add_common(ver);
    ver->add_option("--a", ex_a, "horizontal stretch, > 1");
    ver->add_option("--n", ex_n, "horizons start..end[:step]");
    ver->add_option("--tol", ex_tol, "quadrature tolerance");

    // decompose-curve
    auto* dec = app.add_subcommand("decompose-curve", "split into eps-bounded pieces");
    double dec_eps = 0.01;
    std::string dec_curve;
    add_common(dec);
    dec->add_option("--eps", dec_eps, "piece scale, at most 1/100");
    dec->add_option("--curve", dec_curve, "curve spec (default: a built-in segment)");

    // selftest
    auto* st = app.add_subcommand("selftest", "run the shipped invariant suite");
    add_common(st);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the error message
        return code == 0 ? 0 : 1;
    }
    thread_count() = std::max(1, threads);

    try {
        if (est->parsed())
            return run_estimate(common, methods, n_spec, grid, scheme, eps_list, curve_spec,
                                tol, region_spec, dump_polyline);
        if (diag->parsed())
            return run_diagnose(common, point_spec, angle, diag_n, diag_L, diag_p, tau,
                                radius, diag_curve, ref_h, ref_lambda);
        if (ver->parsed()) return run_verify_example(common, ex_a, ex_n, ex_tol);
        if (dec->parsed()) return run_decompose(common, dec_eps, dec_curve);
        if (st->parsed()) return run_selftest_cmd(common);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
