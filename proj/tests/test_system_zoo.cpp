#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "volgrow/system.hpp"
#include "volgrow/systems.hpp"

using namespace volgrow;
using namespace volgrow::testing;

TEST_CASE("toral automorphism constructors") {
    auto cat = make_toral_automorphism(2, 1, 1, 1);
    REQUIRE(cat.known_entropy.has_value());
    CHECK(*cat.known_entropy == Catch::Approx(cat_entropy()));

    auto id = make_toral_automorphism(1, 0, 0, 1);
    CHECK(*id.known_entropy == 0.0);

    auto shear = make_toral_automorphism(1, 1, 0, 1);
    CHECK(*shear.known_entropy == 0.0);  // parabolic, spectral radius 1

    CHECK_THROWS(make_toral_automorphism(2, 0, 0, 1));  // det 2
}

TEST_CASE("diag linear system") {
    CHECK_THROWS(make_diag_linear(1.0));
    CHECK_THROWS(make_diag_linear(0.5));

    for (double a : {1.1, 1.5}) {
        auto sys = make_diag_linear(a);
        CHECK(sys.df_norm == Catch::Approx(3.0));
        REQUIRE(sys.periodic_sources.size() == 1);
        CHECK(sys.periodic_sources[0].point.u == 0.0);
        std::string why;
        CHECK(certify_sources(sys, &why));
    }
    CHECK(make_diag_linear(3.5).df_norm == Catch::Approx(3.5));
}

TEST_CASE("standard map is symplectic and invertible") {
    auto sys = make_standard_map(6.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Point2 x{uni(rng), uni(rng), DomainKind::torus};
        CHECK(sys.jacobian(x).det() == Catch::Approx(1.0).margin(1e-12));
        const Point2 back = sys.step_back(sys.step_unchecked(x));
        CHECK(distance(back, canonical(x)) < 1e-9);
    }
    SECTION("k=0 is the integrable shear") {
        auto shear = make_standard_map(0.0);
        auto s = lambda_plus_series(shear, torus_grid(6), 24);
        CHECK(s.extrapolated_rate == Catch::Approx(0.0).margin(0.2));
        CHECK(s.entries.back().value < s.entries.front().value);  // polynomial growth decays
    }
}

TEST_CASE("perturbed cat map") {
    CHECK_THROWS(make_perturbed_cat(0.1));
    CHECK_THROWS(make_perturbed_cat(-0.2));

    SECTION("eps = 0 coincides with the cat map") {
        auto pert = make_perturbed_cat(0.0);
        auto cat = make_cat_map();
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const Point2 x{uni(rng), uni(rng), DomainKind::torus};
            CHECK(distance(pert.step_unchecked(x), cat.step_unchecked(x)) < 1e-12);
        }
    }
    SECTION("analytic jacobian agrees with finite differences") {
        auto pert = make_perturbed_cat(0.05);
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const Point2 x{uni(rng), uni(rng), DomainKind::torus};
            const auto ja = pert.jacobian(x), jf = fd_jacobian(pert, x);
            CHECK(std::fabs(ja.a - jf.a) <= 1e-5);
            CHECK(std::fabs(ja.b - jf.b) <= 1e-5);
            CHECK(std::fabs(ja.c - jf.c) <= 1e-5);
            CHECK(std::fabs(ja.d - jf.d) <= 1e-5);
        }
    }
}

TEST_CASE("inverse check across the zoo") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& sys :
         {make_cat_map(), make_identity_map(), make_standard_map(2.5),
          make_perturbed_cat(0.03)}) {
        for (int i = 0; i < 1000; ++i) {
            const Point2 x{uni(rng), uni(rng), DomainKind::torus};
            CHECK(distance(sys.step_back(sys.step_unchecked(x)), canonical(x)) < 1e-9);
        }
    }
    auto diag = make_diag_linear(1.5);
    for (int i = 0; i < 1000; ++i) {
        const Point2 x{uni(rng) - 0.5, uni(rng) - 0.5, DomainKind::plane_box};
        CHECK(distance(diag.step_back(diag.step_unchecked(x)), x) < 1e-9);
    }
}

TEST_CASE("known entropy matches lambda plus for linear systems") {
    // the parabolic shear converges like log(n)/n, so the horizon is long
    for (auto sys : {make_cat_map(), make_identity_map(), make_toral_automorphism(1, 1, 0, 1),
                     make_toral_automorphism(3, 2, 1, 1)}) {
        REQUIRE(sys.known_entropy.has_value());
        auto s = lambda_plus_series(sys, torus_grid(4), 300);
        CHECK(s.extrapolated_rate >= *sys.known_entropy - 1e-9);  // subadditive from above
        CHECK(s.extrapolated_rate <= *sys.known_entropy + 0.02);
    }
}

TEST_CASE("newton refinement of periodic seeds") {
    auto cat = make_cat_map();
    // (0, 0) is fixed; feed a slightly off seed
    const Point2 z = refine_periodic_point(cat, {0.01, 0.995, DomainKind::torus}, 1);
    const Point2 img = cat.step_unchecked(z);
    CHECK(distance(img, z) < 1e-12);

    auto sm = make_standard_map(6.0);
    // (0.5, 0) is a fixed point of the standard map: sin(pi) = 0
    const Point2 w = refine_periodic_point(sm, {0.49, 0.02, DomainKind::torus}, 1);
    CHECK(distance(sm.step_unchecked(w), w) < 1e-10);
}

TEST_CASE("system registry resolves names") {
    CHECK(make_system("cat").name == "cat");
    CHECK(make_system("identity").known_entropy.value() == 0.0);
    CHECK(make_system("diag", {{"a", 1.25}}).df_norm == Catch::Approx(3.0));
    CHECK(make_system("standard", {{"k", 3.0}}).name.find("standard") == 0);
    CHECK(make_system("toral", {{"m11", 2}, {"m12", 1}, {"m21", 1}, {"m22", 1}})
              .known_entropy.value() == Catch::Approx(cat_entropy()));
    CHECK(make_system("cat", {{"r", 7.0}}).smoothness_order == 7.0);
    CHECK_THROWS(make_system("unknown_system"));
    CHECK_THROWS(make_system("cat", {{"r", 0.5}}));
}
