#include "bondlens/bdt.hpp"

#include <cmath>
#include <random>

#include "bondlens/csv.hpp"
#include "bondlens/errors.hpp"

namespace bondlens {

namespace {

void check_positive(double value, const char* name) {
    if (!(value > 0.0))
        throw Error(ErrorCode::bad_argument,
                    std::string(name) + " must be positive, got " + csv::format_double(value));
}

}  // namespace

BdtCalibration calibrate_bdt(const BinomialMoments& rate_moments, double r0) {
    check_positive(r0, "r0");
    check_positive(rate_moments.delta, "delta");

    const double m = rate_moments.mean_per_step;
    const double s = rate_moments.std_per_step;
    double up_gross, down_gross;
    if (s == 0.0) {
        up_gross = down_gross = 1.0 + m;
    } else {
        const double p = rate_moments.p_up;
        if (!(p > 0.0 && p < 1.0))
            throw Error(ErrorCode::degenerate_probability,
                        "p_up must lie strictly inside (0,1) when rate volatility is positive");
        const double q = 1.0 - p;
        up_gross = 1.0 + m + std::sqrt(q / p) * s;
        down_gross = 1.0 + m - std::sqrt(p / q) * s;
    }
    if (!(down_gross > 0.0))
        throw Error(ErrorCode::calibration_infeasible,
                    "down-branch gross return " + csv::format_double(down_gross) +
                        " is not positive; the lattice cannot be calibrated");

    BdtCalibration cal;
    cal.r0 = r0;
    cal.c1 = 1.0 / down_gross;
    cal.c2 = up_gross / down_gross;
    cal.delta = rate_moments.delta;
    cal.log_c1 = std::log(cal.c1);
    cal.log_c2 = std::log(cal.c2);
    cal.rate_moments = rate_moments;
    return cal;
}

BdtCalibration make_calibration(double r0, double c1, double c2, double delta, double p_up) {
    check_positive(r0, "r0");
    check_positive(c1, "c1");
    check_positive(c2, "c2");
    check_positive(delta, "delta");
    if (!(p_up >= 0.0 && p_up <= 1.0))
        throw Error(ErrorCode::probability_range,
                    "p_up must lie in [0,1], got " + csv::format_double(p_up));

    // Per-step branch returns implied by the coefficients.
    const double up = c2 / c1 - 1.0;
    const double down = 1.0 / c1 - 1.0;

    BinomialMoments moments;
    moments.mean_per_step = p_up * up + (1.0 - p_up) * down;
    moments.std_per_step = std::sqrt(p_up * (1.0 - p_up)) * (up - down);
    moments.p_up = p_up;
    moments.delta = delta;
    moments.n_obs = 0;

    BdtCalibration cal;
    cal.r0 = r0;
    cal.c1 = c1;
    cal.c2 = c2;
    cal.delta = delta;
    cal.log_c1 = std::log(c1);
    cal.log_c2 = std::log(c2);
    cal.rate_moments = moments;
    return cal;
}

double rate_at(const RateLattice& lattice, std::size_t n, std::size_t k) {
    if (n > lattice.n_steps)
        throw Error(ErrorCode::index_out_of_range,
                    "slice " + std::to_string(n) + " exceeds lattice depth " +
                        std::to_string(lattice.n_steps));
    if (k > n)
        throw Error(ErrorCode::index_out_of_range,
                    "node " + std::to_string(k) + " exceeds slice " + std::to_string(n));
    const auto& cal = lattice.calibration;
    return cal.r0 * std::exp(static_cast<double>(k) * cal.log_c2 -
                             static_cast<double>(n) * cal.log_c1);
}

std::vector<FittedPoint> fitted_series(const BdtCalibration& calibration,
                                       const ObservationSeries& historical) {
    const auto returns = simple_returns(historical);  // validates length and denominators
    std::vector<FittedPoint> out;
    out.reserve(historical.entries.size());
    std::size_t ups = 0;
    for (std::size_t n = 0; n < historical.entries.size(); ++n) {
        if (n > 0 && returns[n - 1] > 0.0) ++ups;
        const double model =
            calibration.r0 * std::exp(static_cast<double>(ups) * calibration.log_c2 -
                                      static_cast<double>(n) * calibration.log_c1);
        out.push_back({historical.entries[n].date, historical.entries[n].value, model});
    }
    return out;
}

std::vector<double> simulate_path(const BdtCalibration& calibration, std::size_t n_steps,
                                  double p_up, std::uint64_t seed) {
    if (!(p_up >= 0.0 && p_up <= 1.0))
        throw Error(ErrorCode::probability_range,
                    "p_up must lie in [0,1], got " + csv::format_double(p_up));

    std::mt19937_64 rng(seed);
    std::vector<double> path;
    path.reserve(n_steps + 1);
    path.push_back(calibration.r0);
    const double up = calibration.c2 / calibration.c1;
    const double down = 1.0 / calibration.c1;
    for (std::size_t i = 0; i < n_steps; ++i) {
        // Top 53 bits mapped to [0,1); no distribution object, so seeded
        // paths are identical across standard library implementations.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        path.push_back(path.back() * (u < p_up ? up : down));
    }
    return path;
}

}  // namespace bondlens
