#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "volgrow/cocycle_integral.hpp"
#include "volgrow/curve.hpp"
#include "volgrow/systems.hpp"

using namespace volgrow;
using namespace volgrow::testing;

TEST_CASE("arc length basics") {
    SECTION("identity keeps a unit segment at length one") {
        auto id = make_identity_map();
        const Curve seg = make_segment({0.0, 0.3, DomainKind::torus},
                                       {1.0, 0.3, DomainKind::torus});
        CHECK(arc_length(id, seg, 5, 1e-6) == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("vertical segment under diag(1,3) stretches by 9 at n=2") {
        auto sys = make_linear_plane(1.0, 3.0, {-20, 20, -20, 20});
        const Curve seg = make_segment({0.1, 0.0, DomainKind::plane_box},
                                       {0.1, 1.0, DomainKind::plane_box});
        RefineOptions opt;
        opt.enforce_domain = false;
        CHECK(arc_length(sys, seg, 2, 1e-8, opt) == Catch::Approx(9.0).margin(1e-6));
    }
    SECTION("cat-map loop tracks the unstable stretch at n=10") {
        auto cat = make_cat_map();
        const double len = arc_length(cat, make_horizontal_loop(0.3), 10, 1e-4);
        const double lam = (3.0 + std::sqrt(5.0)) / 2.0;
        const double ratio = len / std::pow(lam, 10);
        CHECK(ratio > 0.5);
        CHECK(ratio < 2.0);
    }
    SECTION("bad arguments") {
        auto id = make_identity_map();
        const Curve seg = make_horizontal_loop(0.0);
        CHECK_THROWS(arc_length(id, seg, -1, 1e-6));
        CHECK_THROWS(arc_length(id, seg, 1, 0.0));
    }
}

TEST_CASE("linear exactness of polyline lengths") {
    // image of a straight segment under a linear map is straight: the
    // polyline length must equal ||A^n d|| times the parameter length
    auto cat = make_cat_map();
    const Vec2 d{0.35, 0.15};
    const Curve seg = make_segment({0.1, 0.2, DomainKind::torus},
                                   {0.1 + d.x, 0.2 + d.y, DomainKind::torus});
    for (int n : {1, 3, 6, 9}) {
        const double expected = cocycle_jacobian(cat, {0, 0, DomainKind::torus}, n)
                                    .apply(d)
                                    .norm();
        CHECK(arc_length(cat, seg, n, 1e-7) ==
              Catch::Approx(expected).epsilon(1e-9).margin(1e-9));
    }
}

TEST_CASE("refinement convergence in tol") {
    auto sm = make_standard_map(6.0);
    const Curve loop = make_horizontal_loop(0.37);
    double prev = -1.0;
    for (double tol : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
        const double len = arc_length(sm, loop, 6, tol);
        if (prev > 0) CHECK(len >= prev * (1.0 - 2 * tol));  // monotone up to tol
        prev = len;
    }
    const double fine = arc_length(sm, loop, 6, 1e-6);
    CHECK(std::fabs(fine - prev) <= 2e-3 * fine);
}

TEST_CASE("budget exhaustion is flagged, not fatal") {
    auto cat = make_cat_map();
    RefineOptions opt;
    opt.max_vertices = 2000;
    auto r = arc_length_detail(cat, make_horizontal_loop(0.3), 12, 1e-4, opt);
    CHECK(r.budget_exhausted);
    CHECK(r.length > 0.0);

    auto s = curve_growth_series(cat, make_horizontal_loop(0.3), {2, 4, 12}, 1e-4, opt);
    CHECK_FALSE(s.reliable);
    CHECK(s.entries.size() < 3);
}

TEST_CASE("growth series rates") {
    SECTION("cat loop lands on the entropy") {
        auto cat = make_cat_map();
        std::vector<int> ns{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        auto s = curve_growth_series(cat, make_horizontal_loop(0.3), ns, 1e-4);
        CHECK(s.reliable);
        CHECK(s.extrapolated_rate == Catch::Approx(cat_entropy()).margin(0.02));
    }
    SECTION("identity is flat zero") {
        auto id = make_identity_map();
        auto s = curve_growth_series(id, make_horizontal_loop(0.1), {1, 2, 4, 8}, 1e-6);
        CHECK(s.extrapolated_rate == Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("standard map: curve growth tracks the cocycle integral") {
        auto sm = make_standard_map(6.0);
        std::vector<int> cns{2, 3, 4, 5, 6, 7, 8, 9};
        auto curve = curve_growth_series(sm, make_horizontal_loop(0.37), cns, 1e-4);
        SamplePlan plan;
        plan.density_per_axis = 100;
        std::vector<int> ins;
        for (int n = 2; n <= 20; n += 2) ins.push_back(n);
        auto integral = integral_norm_growth(sm, plan, ins);
        CHECK(std::fabs(curve.extrapolated_rate - integral.extrapolated_rate) <= 0.1);
    }
}

TEST_CASE("sup over a curve family") {
    auto cat = make_cat_map();
    std::vector<Curve> family{make_horizontal_loop(0.3), make_vertical_loop(0.6)};
    std::vector<int> ns{1, 2, 3, 4, 5, 6, 7, 8};
    auto sup = sup_curve_growth(cat, family, ns, 1e-4);
    CHECK(sup.extrapolated_rate == Catch::Approx(cat_entropy()).margin(0.02));

    // the family max dominates each member entrywise
    for (const auto& c : family) {
        auto single = curve_growth_series(cat, c, ns, 1e-4);
        for (size_t k = 0; k < ns.size(); ++k)
            CHECK(sup.entries[k].value >= single.entries[k].value - 1e-12);
    }

    auto id = make_identity_map();
    auto flat = sup_curve_growth(id, family, {1, 2, 4}, 1e-6);
    CHECK(flat.extrapolated_rate == Catch::Approx(0.0).margin(1e-9));

    // inadmissible members are rejected unless enforcement is waived
    Curve fast = make_segment({0.0, 0.0, DomainKind::torus}, {0.9, 0.9, DomainKind::torus});
    CHECK(admissibility_report(fast).cr_norm > 1.0);
    std::vector<Curve> bad{fast};
    CHECK_THROWS(sup_curve_growth(cat, bad, {1, 2}, 1e-4));
    CHECK_NOTHROW(sup_curve_growth(cat, bad, {1, 2}, 1e-4, {}, false));
}

TEST_CASE("polyline lengths match speed quadrature for nonlinear maps") {
    // independent oracle: Len(f^n sigma) = integral of ||Df^n(sigma(t)) sigma'(t)|| dt,
    // evaluated by panelled Gauss quadrature; immune to torus wrapping. The
    // k=6 integrand develops violent spikes, so panel counts scale with n.
    auto quad_length = [](const SurfaceSystem& sys, const Curve& curve, int n,
                          int panels) {
        static const double node[4] = {0.069431844202973712, 0.33000947820757187,
                                       0.66999052179242813, 0.93056815579702623};
        static const double weight[4] = {0.17392742256872693, 0.32607257743127307,
                                         0.32607257743127307, 0.17392742256872693};
        double total = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double lo = double(p) / panels, w = 1.0 / panels;
            for (int q = 0; q < 4; ++q) {
                const double t = lo + node[q] * w;
                const Jacobian2 j = cocycle_jacobian(sys, curve.position(t), n);
                total += weight[q] * w * j.apply(curve.derivative(t)).norm();
            }
        }
        return total;
    };
    const Curve loop = make_horizontal_loop(0.37);
    for (auto sys : {make_standard_map(6.0), make_perturbed_cat(0.05)}) {
        for (int n : {2, 4}) {
            const double oracle = quad_length(sys, loop, n, 65536);
            const double poly = arc_length(sys, loop, n, 1e-6);
            CHECK(poly == Catch::Approx(oracle).epsilon(1e-4));
        }
    }
    // the hardest probed case, frozen: k=6 at n=6 needs ~10^6 panels to
    // converge (5538.9037); the adaptive polyline agrees to 3e-6
    const double poly6 = arc_length(make_standard_map(6.0), loop, 6, 1e-6);
    CHECK(poly6 == Catch::Approx(5538.903683).epsilon(1e-4));
}

TEST_CASE("tight tolerances exhaust the budget loudly") {
    auto sm = make_standard_map(6.0);
    RefineOptions opt;
    opt.max_vertices = 100000;
    CHECK_THROWS_AS(arc_length(sm, make_horizontal_loop(0.37), 6, 1e-9, opt),
                    std::runtime_error);
}

TEST_CASE("clipped arc length") {
    auto sys = make_linear_plane(2.0, 3.0, {-50, 50, -50, 50});
    const Box window{-1.0, 1.0, -1.0, 1.0};

    SECTION("segment fully inside equals the plain length") {
        const Curve seg = make_segment({-0.2, 0.1, DomainKind::plane_box},
                                       {0.2, 0.1, DomainKind::plane_box});
        CHECK(clipped_arc_length(sys, seg, 0, window, 1e-8) ==
              Catch::Approx(0.4).margin(1e-9));
    }
    SECTION("segment fully outside contributes nothing") {
        const Curve seg = make_segment({5.0, 5.0, DomainKind::plane_box},
                                       {6.0, 5.0, DomainKind::plane_box});
        CHECK(clipped_arc_length(sys, seg, 0, window, 1e-8) == 0.0);
    }
    SECTION("unit horizontal segment maps to [0,2] and clips to length 1") {
        const Curve seg = make_segment({0.0, 0.0, DomainKind::plane_box},
                                       {1.0, 0.0, DomainKind::plane_box});
        CHECK(clipped_arc_length(sys, seg, 1, window, 1e-8) ==
              Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("torus systems are rejected") {
        auto cat = make_cat_map();
        CHECK_THROWS(clipped_arc_length(cat, make_horizontal_loop(0.1), 1, window, 1e-6));
    }
}

TEST_CASE("boundedness of curves") {
    SECTION("straight half-speed segment is bounded") {
        const Curve seg = make_segment({0.0, 0.0, DomainKind::torus},
                                       {0.5, 0.0, DomainKind::torus});
        CHECK(is_bounded(seg));
        CHECK(is_eps_bounded(seg, 0.5));
        CHECK_FALSE(is_eps_bounded(seg, 0.4));
    }
    SECTION("rapid oscillation breaks the derivative ratio") {
        Curve wig;
        wig.position = [](double t) {
            return Point2{t, 0.5 * std::sin(50.0 * t), DomainKind::plane_box};
        };
        wig.derivative = [](double t) { return Vec2{1.0, 25.0 * std::cos(50.0 * t)}; };
        wig.name = "wiggle";
        CHECK_FALSE(is_bounded(wig));  // ||d^2|| = 1250 >> ||d||/6
    }
    SECTION("short segments pass the eps gate") {
        const Curve tiny = make_segment({0.2, 0.2, DomainKind::torus},
                                        {0.25, 0.2, DomainKind::torus});
        CHECK(is_eps_bounded(tiny, 0.1));
        const Curve half = make_segment({0.2, 0.2, DomainKind::torus},
                                        {0.7, 0.2, DomainKind::torus});
        CHECK_FALSE(is_eps_bounded(half, 0.1));
    }
    SECTION("bounded curves are nearly constant speed") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 25; ++trial) {
            const Curve c = random_admissible_curve(rng);
            REQUIRE(is_bounded(c));
            const auto rep = boundedness_report(c);
            CHECK(rep.sup_d1 <= 2.0 * rep.min_d1 * (1 + 1e-9));
        }
    }
    SECTION("iterated curves need explicit derivative data") {
        auto cat = make_cat_map();
        const Curve it = iterate_curve(cat, make_horizontal_loop(0.1), 2);
        CHECK_THROWS(is_bounded(it));
    }
}

TEST_CASE("decomposition into eps-bounded pieces") {
    std::mt19937_64 rng(31);
    const Curve base = random_admissible_curve(rng);

    SECTION("piece counts follow the ceiling") {
        CHECK(decompose_eps_bounded(base, 0.01).size() == 100);
        auto pieces = decompose_eps_bounded(base, 0.003);
        CHECK(pieces.size() == 334);
        // piece j covers [ (j-1)/334, j/334 ]
        const double delta = 1.0 / 334.0;
        auto p2 = pieces[1];
        CHECK(p2.position(0.0).u == Catch::Approx(base.position(delta).u).margin(1e-12));
    }
    SECTION("inadmissible inputs and bad eps are rejected") {
        CHECK_THROWS(decompose_eps_bounded(base, 0.02));  // eps > 1/100
        CHECK_THROWS(decompose_eps_bounded(base, 0.0));
        Curve fast = base;
        fast.derivative = [&base](double t) { return base.derivative(t) * 5.0; };
        CHECK_THROWS(decompose_eps_bounded(fast, 0.01));  // C^r norm above 1
    }
    SECTION("pieces are eps-bounded, cover the interval, keep speed") {
        for (int trial = 0; trial < 10; ++trial) {
            const Curve c = random_admissible_curve(rng);
            const double eps = 0.01;
            auto pieces = decompose_eps_bounded(c, eps);
            const int n_pieces = int(pieces.size());
            const double delta = 1.0 / n_pieces;
            REQUIRE(n_pieces == 100);
            for (int j = 0; j < n_pieces; ++j) {
                CHECK(is_eps_bounded(pieces[j], eps));
                const auto rep = boundedness_report(pieces[j]);
                CHECK(rep.min_d1 >= 0.5 * delta * (1 - 1e-12));
            }
            // parameter coverage: piece starts walk 0, delta, ...; last starts 1-delta
            CHECK(pieces.front().position(0.0).u ==
                  Catch::Approx(c.position(0.0).u).margin(1e-12));
            CHECK(pieces.back().position(1.0).u ==
                  Catch::Approx(c.position(1.0).u).margin(1e-12));
        }
    }
}

TEST_CASE("polyline export is ordered in t") {
    auto cat = make_cat_map();
    RefineOptions opt;
    opt.keep_polyline = true;
    auto r = arc_length_detail(cat, make_horizontal_loop(0.3), 3, 1e-4, opt);
    REQUIRE(r.polyline.vertices.size() > 10);
    for (size_t i = 0; i + 1 < r.polyline.vertices.size(); ++i)
        CHECK(r.polyline.vertices[i].t < r.polyline.vertices[i + 1].t);
    CHECK(r.polyline.vertices.front().t == 0.0);
    CHECK(r.polyline.vertices.back().t == 1.0);
}
