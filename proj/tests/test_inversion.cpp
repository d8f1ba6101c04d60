#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "bondlens/bdt.hpp"
#include "bondlens/bondpricer.hpp"
#include "bondlens/errors.hpp"
#include "bondlens/inversion.hpp"
#include "bondlens/marketdata.hpp"

using namespace bondlens;

namespace {

constexpr double kDaily = 1.0 / 252.0;

RateLattice lattice_of(double r0, double c1, double c2, std::size_t n_steps,
                       double delta = kDaily) {
    return RateLattice{make_calibration(r0, c1, c2, delta), n_steps};
}

}  // namespace

TEST_CASE("bisection recovers the probability that produced a price") {
    const auto cases = std::vector<std::pair<double, std::size_t>>{
        {0.05, 10}, {0.3, 10},  {0.5, 10},  {0.95, 10},
        {0.05, 252}, {0.3, 252}, {0.7, 252}, {0.95, 252}};
    for (const auto& [pt0, n] : cases) {
        const auto lattice = lattice_of(0.0377, 1.0236, 1.0464, n);
        const double target = price_zcb_const(lattice, pt0, n);
        const double spread = std::abs(price_zcb_const(lattice, 0.0, n) -
                                       price_zcb_const(lattice, 1.0, n));
        const auto sol = solve_ptilde(lattice, target, n, 1e-10 * spread);
        CHECK(std::abs(sol.ptilde - pt0) <= 1e-8);
        CHECK(sol.diagnostics.residual <= 1e-10 * spread);
        CHECK(sol.diagnostics.iterations > 0);
        CHECK(sol.diagnostics.iterations <= 200);
    }
}

TEST_CASE("bisection also works when up moves lower the rates") {
    const auto lattice = lattice_of(0.05, 1.01, 0.97, 100);
    const double target = price_zcb_const(lattice, 0.42, 100);
    const auto sol = solve_ptilde(lattice, target, 100, 1e-14);
    CHECK(std::abs(sol.ptilde - 0.42) <= 1e-8);
}

TEST_CASE("targets equal to an endpoint price return the endpoint directly") {
    const auto lattice = lattice_of(0.0377, 1.0236, 1.0464, 50);
    const double p0 = price_zcb_const(lattice, 0.0, 50);
    const double p1 = price_zcb_const(lattice, 1.0, 50);

    const auto at_zero = solve_ptilde(lattice, p0, 50, 1e-12);
    CHECK(at_zero.ptilde == 0.0);
    CHECK(at_zero.diagnostics.iterations == 0);

    const auto at_one = solve_ptilde(lattice, p1, 50, 1e-12);
    CHECK(at_one.ptilde == 1.0);
    CHECK(at_one.diagnostics.iterations == 0);
}

TEST_CASE("targets outside the attainable band are refused with the band") {
    const auto lattice = lattice_of(0.0377, 1.0236, 1.0464, 50);
    const double hi = price_zcb_const(lattice, 0.0, 50);  // c2 > 1: down is cheapest discounting
    const double lo = price_zcb_const(lattice, 1.0, 50);
    REQUIRE(hi > lo);

    for (const double target : {hi * 1.01, lo * 0.99}) {
        try {
            solve_ptilde(lattice, target, 50, 1e-12);
            FAIL("expected unattainable_price");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::unattainable_price);
            CHECK(std::string(e.what()).find("[") != std::string::npos);
        }
    }

    try {
        solve_ptilde(lattice, -0.5, 50, 1e-12);
        FAIL("expected bad_argument");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::bad_argument);
    }
    try {
        solve_ptilde(lattice, 0.5, 50, 0.0);
        FAIL("expected bad_argument");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::bad_argument);
    }
}

TEST_CASE("a flat lattice cannot identify the probability") {
    // c2 = 1 makes every slice's rates equal, so the price ignores ptilde
    const auto lattice = lattice_of(0.05, 1.02, 1.0, 30);
    REQUIRE(price_zcb_const(lattice, 0.0, 30) == price_zcb_const(lattice, 1.0, 30));
    try {
        solve_ptilde(lattice, price_zcb_const(lattice, 0.0, 30) * 0.9, 30, 1e-12);
        FAIL("expected non_identifiable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_identifiable);
    }
}

TEST_CASE("drift inversion undoes the tilt") {
    for (double p = 0.05; p < 0.96; p += 0.05) {
        for (double theta = -3.0; theta <= 3.0; theta += 0.25) {
            const double sigma = 0.2, rate = 0.0377;
            const double mu = rate + theta * sigma;
            const double pt = ptilde_from_theta(p, theta, kDaily);
            const double back = implied_mu(pt, p, sigma, rate, kDaily);
            CHECK(back == doctest::Approx(mu).epsilon(1e-12));
        }
    }
    CHECK(implied_mu(0.4563, 0.4821, 0.2, 0.0377, kDaily) ==
          doctest::Approx(0.2 * (0.4821 - 0.4563) /
                              std::sqrt(0.4821 * 0.5179 / 252.0) +
                          0.0377)
              .epsilon(1e-13));
}

TEST_CASE("volatility inversion undoes the tilt away from the fixed point") {
    for (double p = 0.05; p < 0.96; p += 0.05) {
        for (double theta = -3.0; theta <= 3.0; theta += 0.25) {
            if (theta == 0.0) continue;  // ptilde == p, handled below
            const double sigma = 0.27, rate = 0.0377;
            const double mu = rate + theta * sigma;
            const double pt = ptilde_from_theta(p, theta, kDaily);
            const auto back = implied_sigma(pt, p, mu, rate, kDaily);
            CHECK(back.valid);
            CHECK(back.sigma == doctest::Approx(sigma).epsilon(1e-12));
        }
    }

    try {
        implied_sigma(0.4821, 0.4821, 0.2, 0.0377, kDaily);
        FAIL("expected indeterminate_sigma");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::indeterminate_sigma);
    }

    // drift says down-tilt, probability says up-tilt: algebra goes negative
    const double pt_up = ptilde_from_theta(0.5, 1.0, kDaily);  // pt < p
    const auto clash = implied_sigma(pt_up, 0.5, 0.01, 0.05, kDaily);
    CHECK_FALSE(clash.valid);
    CHECK(clash.sigma < 0.0);
}

TEST_CASE("probability inversion selects the root that satisfies the signed equation") {
    for (double p = 0.01; p < 0.995; p += 0.02) {
        for (double theta = -3.0; theta <= 3.0; theta += 0.25) {
            const double pt = ptilde_from_theta(p, theta, kDaily);
            if (!(pt >= 0.0 && pt <= 1.0)) continue;
            const auto back = implied_p(pt, theta, kDaily);
            CHECK(std::abs(back.p - p) <= 1e-10);
            CHECK(back.flags.residual <= 1e-8);
            if (theta > 0.0 && p > pt)
                CHECK(back.flags.used_plus_branch);
            if (theta < 0.0)
                CHECK_FALSE(back.flags.used_plus_branch);
        }
    }
}

TEST_CASE("probability inversion edge cases") {
    // theta = 0 is the identity
    const auto identity = implied_p(0.37, 0.0, kDaily);
    CHECK(identity.p == 0.37);
    CHECK(identity.flags.minus_root == identity.flags.plus_root);

    // ptilde = 0 with a positive tilt: both p = 0 and one interior p satisfy
    // the equation; ties go to the smaller (minus) root
    const auto zero = implied_p(0.0, 1.5, kDaily);
    CHECK(zero.p == 0.0);
    CHECK_FALSE(zero.flags.used_plus_branch);
    CHECK(zero.flags.residual <= 1e-15);

    try {
        implied_p(1.2, 0.5, kDaily);
        FAIL("expected probability_range");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::probability_range);
    }
    try {
        implied_p(0.5, 0.5, 0.0);
        FAIL("expected bad_argument");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::bad_argument);
    }
}

TEST_CASE("term-structure sweep inverts a curve it generated") {
    const auto cal = make_calibration(0.0377, 1.0236, 1.0464, kDaily);
    const EquityParams baseline{0.2017, 0.2, 0.4821};
    const double rate = 0.0377;
    const double theta = (baseline.mu - rate) / baseline.sigma;
    const double pt0 = ptilde_from_theta(baseline.p, theta, kDaily);

    // price each grid maturity with the constant tilt, quote it as a yield
    const std::vector<double> grid = {0.25, 0.5, 1.0, 2.0};
    YieldCurve curve;
    for (const double T : grid) {
        const auto n = static_cast<std::size_t>(std::llround(T * 252.0));
        const double price = price_zcb_const(RateLattice{cal, n}, pt0, n);
        curve.points.push_back({T, -std::log(price) / T});
    }

    const auto points = build_implied_curves(curve, cal, baseline, rate, grid, 1e-12);
    REQUIRE(points.size() == grid.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        INFO("maturity ", grid[i]);
        REQUIRE_FALSE(pt.error.has_value());
        CHECK(pt.maturity_years == grid[i]);
        CHECK(pt.n_steps == static_cast<std::size_t>(std::llround(grid[i] * 252.0)));
        CHECK(std::abs(pt.ptilde - pt0) <= 1e-8);
        REQUIRE(pt.mu.has_value());
        CHECK(*pt.mu == doctest::Approx(baseline.mu).epsilon(1e-6));
        REQUIRE(pt.sigma.has_value());
        CHECK(*pt.sigma == doctest::Approx(baseline.sigma).epsilon(1e-6));
        REQUIRE(pt.p.has_value());
        CHECK(std::abs(*pt.p - baseline.p) <= 1e-6);
        CHECK(pt.flags.find("p_root=plus") != std::string::npos);  // theta > 0
    }
}

TEST_CASE("sweep records per-point failures and keeps going") {
    const auto cal = make_calibration(0.0377, 1.0236, 1.0464, kDaily);
    const EquityParams baseline{0.2017, 0.2, 0.4821};

    YieldCurve curve;
    curve.points = {{0.5, 0.05}, {1.0, 0.05}};

    // 5y is outside the quoted curve; -1 is not a maturity; 1y is fine
    const std::vector<double> grid = {5.0, -1.0, 1.0};
    const auto points = build_implied_curves(curve, cal, baseline, 0.0377, grid, 1e-12);
    REQUIRE(points.size() == 3);

    CHECK(points[0].error.has_value());
    CHECK(points[0].flags.find("error") != std::string::npos);
    CHECK_FALSE(points[0].mu.has_value());

    CHECK(points[1].error.has_value());
    CHECK(points[2].error.has_value() == false);
    CHECK(points[2].mu.has_value());
}

TEST_CASE("sweep flags a volatility whose sign cannot be matched") {
    const auto cal = make_calibration(0.0377, 1.0236, 1.0464, kDaily);
    // baseline drift below the theta rate (down-tilt), yet the curve is
    // priced from an up-tilt; the volatility algebra then yields sigma < 0
    const EquityParams baseline{0.01, 0.2, 0.4821};
    const double pt0 = ptilde_from_theta(0.4821, 0.9, kDaily);

    YieldCurve curve;
    const std::vector<double> grid = {1.0};
    const auto n = std::size_t{252};
    const double price = price_zcb_const(RateLattice{cal, n}, pt0, n);
    curve.points.push_back({1.0, -std::log(price) / 1.0});

    const auto points = build_implied_curves(curve, cal, baseline, 0.0377, grid, 1e-12);
    REQUIRE(points.size() == 1);
    REQUIRE_FALSE(points[0].error.has_value());
    CHECK_FALSE(points[0].sigma.has_value());
    CHECK(points[0].flags.find("sigma_invalid") != std::string::npos);
    CHECK(points[0].mu.has_value());  // drift inversion is always defined
    CHECK(points[0].p.has_value());
}

TEST_CASE("sweep validates its baseline up front") {
    const auto cal = make_calibration(0.05, 1.02, 1.04, kDaily);
    YieldCurve curve;
    curve.points = {{1.0, 0.05}};
    const std::vector<double> grid = {1.0};

    try {
        build_implied_curves(curve, cal, {0.2, 0.0, 0.5}, 0.05, grid, 1e-12);
        FAIL("expected bad_argument for sigma");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::bad_argument);
    }
    try {
        build_implied_curves(curve, cal, {0.2, 0.2, 0.0}, 0.05, grid, 1e-12);
        FAIL("expected degenerate_probability for boundary p");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_probability);
    }
}
