#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "helpers.hpp"
#include "volgrow/system.hpp"
#include "volgrow/systems.hpp"

using namespace volgrow;
using namespace volgrow::testing;

namespace {

Jacobian2 matpow(const Jacobian2& m, int n) {
    Jacobian2 acc = Jacobian2::identity();
    for (int i = 0; i < n; ++i) acc = m * acc;
    return acc;
}

std::vector<SurfaceSystem> builtin_systems() {
    std::vector<SurfaceSystem> out;
    out.push_back(make_cat_map());
    out.push_back(make_standard_map(6.0));
    out.push_back(make_perturbed_cat(0.05));
    return out;
}

}  // namespace

TEST_CASE("cocycle jacobian basics") {
    auto cat = make_cat_map();
    const Point2 x{0.31, 0.77, DomainKind::torus};

    auto j0 = cocycle_jacobian(cat, x, 0);
    CHECK(j0.a == 1.0);
    CHECK(j0.b == 0.0);
    CHECK(j0.c == 0.0);
    CHECK(j0.d == 1.0);

    auto j1 = cocycle_jacobian(cat, x, 1);
    CHECK(j1.a == 2.0);
    CHECK(j1.b == 1.0);

    // direct matrix multiplication oracle
    auto j2 = cocycle_jacobian(cat, x, 2);
    auto ref = matpow({2, 1, 1, 1}, 2);
    CHECK(j2.a == Catch::Approx(ref.a));  // [[5,3],[3,2]]
    CHECK(j2.b == Catch::Approx(3.0));
    CHECK(j2.c == Catch::Approx(3.0));
    CHECK(j2.d == Catch::Approx(2.0));
}

TEST_CASE("cocycle leaves plane box with step index") {
    auto diag = make_diag_linear(1.5);
    try {
        cocycle_jacobian(diag, {1.5, 1.5, DomainKind::plane_box}, 6);
        FAIL("expected escape");
    } catch (const escape_error& e) {
        CHECK(e.step >= 1);
    }
}

TEST_CASE("cocycle composition and submultiplicativity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> pick_n(0, 12);
    for (const auto& sys : builtin_systems()) {
        for (int trial = 0; trial < 200; ++trial) {
            const Point2 x{uni(rng), uni(rng), DomainKind::torus};
            const int n = pick_n(rng);
            const int m = std::uniform_int_distribution<int>(0, n)(rng);
            const auto jn = cocycle_jacobian(sys, x, n);
            const auto jm = cocycle_jacobian(sys, x, m);
            Point2 fmx = canonical(x);
            for (int i = 0; i < m; ++i) fmx = sys.step_unchecked(fmx);
            const auto jrest = cocycle_jacobian(sys, fmx, n - m);
            const auto prod = jrest * jm;
            const double scale = std::max(1.0, jn.max_abs_entry());
            CHECK(std::fabs(prod.a - jn.a) / scale < 1e-9);
            CHECK(std::fabs(prod.b - jn.b) / scale < 1e-9);
            CHECK(std::fabs(prod.c - jn.c) / scale < 1e-9);
            CHECK(std::fabs(prod.d - jn.d) / scale < 1e-9);
            CHECK(operator_norm(jn) <=
                  operator_norm(jrest) * operator_norm(jm) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("canonical lift") {
    SECTION("identity fixes everything") {
        auto id = make_identity_map();
        TangentPoint xv{{0.3, 0.4, DomainKind::torus}, 0.7};
        auto y = lift_step(id, xv);
        CHECK(y.base.u == Catch::Approx(0.3));
        CHECK(y.angle == Catch::Approx(0.7));
    }
    SECTION("eigendirection of a diagonal stretch stays put") {
        auto sys = make_linear_plane(2.0, 1.0);
        auto y = lift_step(sys, {{0.1, 0.1, DomainKind::plane_box}, 0.0});
        CHECK(y.angle == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("rotation moves the direction by the rotation angle") {
        auto rot = make_rotation_plane(std::numbers::pi / 2);
        auto y = lift_step(rot, {{0.2, 0.1, DomainKind::plane_box}, 0.0});
        CHECK(y.angle == Catch::Approx(std::numbers::pi / 2));
    }
    SECTION("angles come back reduced mod pi") {
        auto rot = make_rotation_plane(3.0);  // pushes angle past pi
        auto y = lift_step(rot, {{0.2, 0.1, DomainKind::plane_box}, 1.0});
        CHECK(y.angle >= 0.0);
        CHECK(y.angle < std::numbers::pi);
    }
}

TEST_CASE("rho and rho_prime") {
    auto id = make_identity_map();
    CHECK(rho(id, {{0.5, 0.5, DomainKind::torus}, 1.1}) == Catch::Approx(0.0).margin(1e-15));
    CHECK(rho_prime(id, {{0.5, 0.5, DomainKind::torus}, 1.1}) ==
          Catch::Approx(0.0).margin(1e-15));

    auto diag = make_diag_linear(1.5);
    const TangentPoint horiz{{0.1, 0.0, DomainKind::plane_box}, 0.0};
    CHECK(rho(diag, horiz) == Catch::Approx(std::log(1.5)));
    diag.smoothness_order = 2.0;
    CHECK(rho_prime(diag, horiz) ==
          Catch::Approx(std::log(1.5) - 0.5 * std::log(3.0)));

    // cat map along the leading eigenvector: rho equals log of the eigenvalue
    auto cat = make_cat_map();
    const double lam = (3.0 + std::sqrt(5.0)) / 2.0;
    const double angle = std::atan2(lam - 2.0, 1.0);
    CHECK(rho(cat, {{0.2, 0.9, DomainKind::torus}, angle}) == Catch::Approx(std::log(lam)));

    // rho' approaches rho as the smoothness order grows
    double prev_gap = 1e9;
    for (double r : {2.0, 8.0, 64.0, 1024.0}) {
        cat.smoothness_order = r;
        const double gap = rho(cat, {{0.2, 0.9, DomainKind::torus}, angle}) -
                           rho_prime(cat, {{0.2, 0.9, DomainKind::torus}, angle});
        CHECK(gap == Catch::Approx(std::log(lam) / r));
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_CASE("rho telescopes along the lift") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& sys : builtin_systems()) {
        for (int trial = 0; trial < 20; ++trial) {
            TangentPoint xv{{uni(rng), uni(rng), DomainKind::torus},
                            uni(rng) * std::numbers::pi};
            const int n = 9;
            double sum = 0.0;
            TangentPoint cur = xv;
            for (int i = 0; i < n; ++i) {
                sum += rho(sys, cur);
                if (i + 1 < n) cur = lift_step(sys, cur);
            }
            const Vec2 v = unit_direction(xv.angle);
            const double direct =
                std::log(cocycle_jacobian(sys, xv.base, n).apply(v).norm());
            CHECK(sum == Catch::Approx(direct).margin(1e-9));
        }
    }
}

TEST_CASE("analytic jacobians match finite differences") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& sys : builtin_systems()) {
        for (int trial = 0; trial < 100; ++trial) {
            const Point2 x{uni(rng), uni(rng), DomainKind::torus};
            const Jacobian2 ja = sys.jacobian(x);
            const Jacobian2 jf = fd_jacobian(sys, x);
            CHECK(std::fabs(ja.a - jf.a) <= 1e-5);
            CHECK(std::fabs(ja.b - jf.b) <= 1e-5);
            CHECK(std::fabs(ja.c - jf.c) <= 1e-5);
            CHECK(std::fabs(ja.d - jf.d) <= 1e-5);
        }
    }
}

TEST_CASE("lambda plus series") {
    SECTION("cat map hits the spectral radius") {
        auto cat = make_cat_map();
        auto s = lambda_plus_series(cat, torus_grid(8), 12);
        const double lam = cat_entropy();
        for (const auto& e : s.entries) {
            // (1/n) log ||A^n|| decreases toward log lambda
            CHECK(e.value >= lam - 1e-12);
        }
        CHECK(s.extrapolated_rate == Catch::Approx(lam).margin(5e-3));
        CHECK(s.fit_intercept == Catch::Approx(lam).margin(5e-3));
    }
    SECTION("identity is flat zero") {
        auto id = make_identity_map();
        auto s = lambda_plus_series(id, torus_grid(4), 8);
        for (const auto& e : s.entries) CHECK(e.value == Catch::Approx(0.0).margin(1e-14));
        CHECK(s.extrapolated_rate == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("diagonal stretch is exactly log 3 for every n") {
        auto diag = make_diag_linear(1.5);
        std::vector<Point2> grid = {{0.0, 0.0, DomainKind::plane_box}};
        auto s = lambda_plus_series(diag, grid, 10);
        for (const auto& e : s.entries)
            CHECK(e.value == Catch::Approx(std::log(3.0)).margin(1e-12));
    }
    SECTION("empty grid is rejected") {
        auto cat = make_cat_map();
        CHECK_THROWS(lambda_plus_series(cat, {}, 5));
    }
}
