#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "bondlens/bdt.hpp"
#include "bondlens/errors.hpp"
#include "bondlens/marketdata.hpp"

using namespace bondlens;

namespace {

constexpr double kDaily = 1.0 / 252.0;

BinomialMoments moments_of(double mean, double sd, double p, double delta = kDaily) {
    BinomialMoments m;
    m.mean_per_step = mean;
    m.std_per_step = sd;
    m.p_up = p;
    m.delta = delta;
    m.n_obs = 100;
    return m;
}

}  // namespace

TEST_CASE("coefficients from a symmetric hand-checked calibration") {
    // per-step mean 0.001, per-step std 0.02, even odds:
    // down gross = 1.001 - 0.02 = 0.981, up gross = 1.001 + 0.02 = 1.021
    const auto cal = calibrate_bdt(moments_of(0.001, 0.02, 0.5), 0.05);

    CHECK(cal.r0 == 0.05);
    CHECK(cal.c1 == doctest::Approx(1.0 / 0.981).epsilon(1e-15));
    CHECK(cal.c2 == doctest::Approx(1.021 / 0.981).epsilon(1e-15));
    CHECK(cal.log_c1 == std::log(cal.c1));
    CHECK(cal.log_c2 == std::log(cal.c2));
    CHECK(cal.delta == kDaily);
}

TEST_CASE("asymmetric odds tilt the branch returns") {
    const double p = 0.3, m = 0.0005, s = 0.015;
    const auto cal = calibrate_bdt(moments_of(m, s, p), 0.04);

    const double up_gross = 1.0 + m + std::sqrt((1.0 - p) / p) * s;
    const double down_gross = 1.0 + m - std::sqrt(p / (1.0 - p)) * s;
    CHECK(cal.c1 == doctest::Approx(1.0 / down_gross).epsilon(1e-15));
    CHECK(cal.c2 == doctest::Approx(up_gross / down_gross).epsilon(1e-15));

    // branch moments reproduce the inputs
    const double up = cal.c2 / cal.c1 - 1.0;
    const double down = 1.0 / cal.c1 - 1.0;
    CHECK(p * up + (1.0 - p) * down == doctest::Approx(m).epsilon(1e-12));
    CHECK(std::sqrt(p * (1.0 - p)) * (up - down) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("zero rate volatility produces a deterministic drifting lattice") {
    const auto cal = calibrate_bdt(moments_of(0.002, 0.0, 1.0), 0.03);
    CHECK(cal.c2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cal.c1 == doctest::Approx(1.0 / 1.002).epsilon(1e-15));
}

TEST_CASE("calibration rejects impossible configurations") {
    try {
        calibrate_bdt(moments_of(0.001, 0.02, 0.0), 0.05);
        FAIL("expected degenerate_probability");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_probability);
    }

    // a violent down branch drives the gross return negative
    try {
        calibrate_bdt(moments_of(0.0, 0.5, 0.9), 0.05);
        FAIL("expected calibration_infeasible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::calibration_infeasible);
    }

    try {
        calibrate_bdt(moments_of(0.001, 0.02, 0.5), -0.01);
        FAIL("expected bad_argument");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::bad_argument);
    }
}

TEST_CASE("coefficient round trip: calibrate, rebuild, re-derive") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> mean_dist(-0.002, 0.002);
    std::uniform_real_distribution<double> std_dist(0.0, 0.03);
    std::uniform_real_distribution<double> p_dist(0.2, 0.8);
    std::uniform_real_distribution<double> r0_dist(0.005, 0.12);

    for (int trial = 0; trial < 300; ++trial) {
        const auto m = moments_of(mean_dist(rng), std_dist(rng), p_dist(rng));
        const double r0 = r0_dist(rng);
        const auto cal = calibrate_bdt(m, r0);

        // rebuilding from (r0, c1, c2, p) reconstructs the same moments
        const auto rebuilt = make_calibration(r0, cal.c1, cal.c2, kDaily, m.p_up);
        CHECK(rebuilt.rate_moments.mean_per_step ==
              doctest::Approx(m.mean_per_step).epsilon(1e-12));
        if (m.std_per_step > 0.0)
            CHECK(rebuilt.rate_moments.std_per_step ==
                  doctest::Approx(m.std_per_step).epsilon(1e-12));

        // and calibrating the rebuilt moments lands on the same coefficients
        const auto again = calibrate_bdt(rebuilt.rate_moments, r0);
        CHECK(again.c1 == doctest::Approx(cal.c1).epsilon(1e-12));
        CHECK(again.c2 == doctest::Approx(cal.c2).epsilon(1e-12));
    }
}

TEST_CASE("node rates follow the closed form at every index") {
    const auto cal = make_calibration(0.0377, 1.0236, 1.0464, kDaily);
    const RateLattice lattice{cal, 12};

    // spot check against direct powers
    CHECK(rate_at(lattice, 0, 0) == 0.0377);
    CHECK(rate_at(lattice, 1, 0) == doctest::Approx(0.0377 / 1.0236).epsilon(1e-14));
    CHECK(rate_at(lattice, 1, 1) ==
          doctest::Approx(0.0377 * 1.0464 / 1.0236).epsilon(1e-14));
    CHECK(rate_at(lattice, 2, 1) ==
          doctest::Approx(0.0377 * 1.0464 / (1.0236 * 1.0236)).epsilon(1e-14));

    for (std::size_t n = 0; n <= 12; ++n)
        for (std::size_t k = 0; k <= n; ++k) {
            const double direct =
                0.0377 * std::pow(1.0464, double(k)) / std::pow(1.0236, double(n));
            CHECK(rate_at(lattice, n, k) == doctest::Approx(direct).epsilon(1e-13));
        }
}

TEST_CASE("rates are monotone in the up count and shrink with depth") {
    const auto cal = make_calibration(0.05, 1.02, 1.05, kDaily);
    const RateLattice lattice{cal, 30};
    for (std::size_t n = 1; n <= 30; ++n) {
        for (std::size_t k = 1; k <= n; ++k)
            CHECK(rate_at(lattice, n, k) > rate_at(lattice, n, k - 1));
        CHECK(rate_at(lattice, n, 0) < rate_at(lattice, n - 1, 0));  // c1 > 1
    }
}

TEST_CASE("every path to a node yields the same rate") {
    // multiply branch factors along random paths; the terminal rate depends
    // only on how many ups occurred, not on their order
    const auto cal = make_calibration(0.0377, 1.0236, 1.0464, kDaily);
    const RateLattice lattice{cal, 20};
    const double up = cal.c2 / cal.c1;
    const double down = 1.0 / cal.c1;

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 20;
        double rate = cal.r0;
        std::size_t ups = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng() & 1) {
                rate *= up;
                ++ups;
            } else {
                rate *= down;
            }
        }
        CHECK(rate == doctest::Approx(rate_at(lattice, n, ups)).epsilon(1e-12));
    }
}

TEST_CASE("out-of-range node indices are refused") {
    const RateLattice lattice{make_calibration(0.05, 1.02, 1.05, kDaily), 5};
    try {
        rate_at(lattice, 6, 0);
        FAIL("expected index_out_of_range");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::index_out_of_range);
    }
    try {
        rate_at(lattice, 3, 4);
        FAIL("expected index_out_of_range");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::index_out_of_range);
    }
}

TEST_CASE("fitted series walks up exactly on strictly positive returns") {
    ObservationSeries hist;
    hist.kind = SeriesKind::rate;
    // returns: +, -, 0, + ; up-counts after each day: 1, 1, 1, 2
    const std::vector<double> values = {0.04, 0.042, 0.041, 0.041, 0.043};
    for (std::size_t i = 0; i < values.size(); ++i)
        hist.entries.push_back({Date{2023, 6, int(12 + i)}, values[i]});

    const auto cal = make_calibration(0.04, 1.0236, 1.0464, kDaily);
    const auto fit = fitted_series(cal, hist);
    REQUIRE(fit.size() == 5);

    const std::vector<std::size_t> ups = {0, 1, 1, 1, 2};
    for (std::size_t n = 0; n < fit.size(); ++n) {
        CHECK(fit[n].date == hist.entries[n].date);
        CHECK(fit[n].market == values[n]);
        const double expect = 0.04 * std::pow(1.0464, double(ups[n])) /
                              std::pow(1.0236, double(n));
        CHECK(fit[n].model == doctest::Approx(expect).epsilon(1e-13));
    }
    CHECK(fit[0].model == 0.04);  // anchored at the first observation
}

TEST_CASE("simulated paths are reproducible and lattice-consistent") {
    const auto cal = make_calibration(0.0377, 1.0236, 1.0464, kDaily);

    const auto path1 = simulate_path(cal, 252, 0.5, 12345);
    const auto path2 = simulate_path(cal, 252, 0.5, 12345);
    const auto path3 = simulate_path(cal, 252, 0.5, 54321);
    REQUIRE(path1.size() == 253);
    CHECK(path1 == path2);  // bitwise equal
    CHECK(path1 != path3);
    CHECK(path1[0] == 0.0377);

    // each step is one of the two branch multiples, so the path stays on
    // lattice nodes
    const double up = cal.c2 / cal.c1;
    const double down = 1.0 / cal.c1;
    std::size_t ups = 0;
    const RateLattice lattice{cal, 252};
    for (std::size_t i = 1; i < path1.size(); ++i) {
        const double g = path1[i] / path1[i - 1];
        const bool was_up = std::abs(g - up) < std::abs(g - down);
        if (was_up) ++ups;
        CHECK(g == doctest::Approx(was_up ? up : down).epsilon(1e-12));
        CHECK(path1[i] == doctest::Approx(rate_at(lattice, i, ups)).epsilon(1e-9));
    }
}

TEST_CASE("extreme up-probabilities pin the simulated path to one branch") {
    const auto cal = make_calibration(0.05, 1.02, 1.05, kDaily);
    const auto all_down = simulate_path(cal, 50, 0.0, 1);
    const auto all_up = simulate_path(cal, 50, 1.0, 1);
    const RateLattice lattice{cal, 50};
    CHECK(all_down.back() == doctest::Approx(rate_at(lattice, 50, 0)).epsilon(1e-12));
    CHECK(all_up.back() == doctest::Approx(rate_at(lattice, 50, 50)).epsilon(1e-12));

    try {
        simulate_path(cal, 10, 1.5, 1);
        FAIL("expected probability_range");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::probability_range);
    }
}
