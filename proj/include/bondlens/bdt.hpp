#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bondlens/estimation.hpp"
#include "bondlens/marketdata.hpp"

namespace bondlens {

// Short-rate lattice coefficients: the rate after n steps of which k were
// up moves is R(n,k) = r0 * c1^(-n) * c2^k. Logs are cached because deep
// slices are evaluated in log space.
struct BdtCalibration {
    double r0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double delta = 0.0;
    double log_c1 = 0.0;
    double log_c2 = 0.0;
    BinomialMoments rate_moments;  // per-step moments behind the coefficients
};

// Solves the per-step branch system for the lattice coefficients:
//   1/c1    = 1 + m - sqrt(p/(1-p)) s      (down gross return)
//   c2/c1   = 1 + m + sqrt((1-p)/p) s      (up gross return)
// with m, s the per-step mean and standard deviation of rate returns.
BdtCalibration calibrate_bdt(const BinomialMoments& rate_moments, double r0);

// Builds a calibration from known coefficients; the per-step moments are
// reconstructed from (c1, c2, p_up) by the inverse of the system above.
BdtCalibration make_calibration(double r0, double c1, double c2, double delta,
                                double p_up = 0.5);

struct RateLattice {
    BdtCalibration calibration;
    std::size_t n_steps = 0;
};

// R(n,k) via exp(k log c2 - n log c1); one transcendental call per node and
// no overflow-prone intermediate powers at any depth.
double rate_at(const RateLattice& lattice, std::size_t n, std::size_t k);

struct FittedPoint {
    Date date;
    double market = 0.0;
    double model = 0.0;
};

// Tracks a historical series on the lattice: the model value on day n is
// r0 * c1^(-n) * c2^(H_n) with H_n the count of strictly positive returns
// through day n. Day 0 is the anchor (model = r0).
std::vector<FittedPoint> fitted_series(const BdtCalibration& calibration,
                                       const ObservationSeries& historical);

// Seeded random walk over lattice transitions: each step multiplies by
// c2/c1 with probability p_up, else by 1/c1. Element 0 is r0; the result
// has n_steps + 1 entries and is reproducible for a given seed.
std::vector<double> simulate_path(const BdtCalibration& calibration, std::size_t n_steps,
                                  double p_up, std::uint64_t seed);

}  // namespace bondlens
