#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "volgrow/geometry.hpp"
#include "volgrow/series.hpp"

using namespace volgrow;
using namespace volgrow::testing;

TEST_CASE("operator norm on known matrices") {
    CHECK(operator_norm(Jacobian2::identity()) == Catch::Approx(1.0));
    CHECK(operator_norm({1.5, 0, 0, 3.0}) == Catch::Approx(3.0));
    CHECK(operator_norm({3.5, 0, 0, 3.0}) == Catch::Approx(3.5));
    // symmetric matrix: norm is the top eigenvalue (3 + sqrt 5)/2
    CHECK(operator_norm({2, 1, 1, 1}) == Catch::Approx((3.0 + std::sqrt(5.0)) / 2.0));
}

TEST_CASE("operator norm matches direction scan") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        Jacobian2 j{uni(rng), uni(rng), uni(rng), uni(rng)};
        const double brute = operator_norm_bruteforce(j);
        CHECK(operator_norm(j) == Catch::Approx(brute).epsilon(1e-6));
        CHECK(operator_norm(j) >= brute - 1e-12);  // scan only undershoots
    }
}

TEST_CASE("torus wrapping") {
    const Point2 p = canonical({1.25, -0.25, DomainKind::torus});
    CHECK(p.u == Catch::Approx(0.25));
    CHECK(p.v == Catch::Approx(0.75));
    CHECK(distance({0.05, 0.5, DomainKind::torus}, {0.95, 0.5, DomainKind::torus}) ==
          Catch::Approx(0.1));
    CHECK(distance({0.1, 0.1, DomainKind::plane_box}, {0.9, 0.1, DomainKind::plane_box}) ==
          Catch::Approx(0.8));
}

TEST_CASE("series extrapolation") {
    SECTION("linear 1/n fit recovers the intercept") {
        std::vector<SeriesEntry> e;
        for (int n = 1; n <= 20; ++n) e.push_back({n, 0.7 + 2.0 / n});
        auto s = make_series(e, ExtrapolationMethod::linear_inv_n);
        CHECK(s.extrapolated_rate == Catch::Approx(0.7).margin(1e-12));
        CHECK(s.fit_slope == Catch::Approx(2.0).margin(1e-9));
        CHECK(s.cauchy_rate == Catch::Approx(0.7).margin(1e-12));
    }
    SECTION("fekete takes the minimum") {
        auto s = make_series({{1, 1.0}, {2, 0.8}, {3, 0.85}}, ExtrapolationMethod::fekete_min);
        CHECK(s.extrapolated_rate == Catch::Approx(0.8));
    }
    SECTION("log slope of counting data") {
        std::vector<SeriesEntry> e;
        for (int n = 1; n <= 8; ++n) e.push_back({n, (0.9 * n + 1.3) / n});
        auto s = make_series(e, ExtrapolationMethod::log_slope);
        CHECK(s.extrapolated_rate == Catch::Approx(0.9).margin(1e-9));
    }
    SECTION("rejects bad input") {
        CHECK_THROWS(make_series({{2, 1.0}, {1, 1.0}}, ExtrapolationMethod::linear_inv_n));
        CHECK_THROWS(make_series({{1, std::nan("")}}, ExtrapolationMethod::linear_inv_n));
    }
}
