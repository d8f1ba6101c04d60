#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace bondlens {

struct ObservationSeries;

// Sample moments of one-step simple returns, stored in per-step units next
// to the step size that produced them. Accessors convert to instantaneous
// (annualized) units: a per-step mean m corresponds to mu = m / delta and a
// per-step standard deviation s to sigma = s / sqrt(delta).
struct BinomialMoments {
    double mean_per_step = 0.0;
    double std_per_step = 0.0;  // sample (n-1) standard deviation; 0 when n == 1
    double p_up = 0.0;          // fraction of strictly positive returns
    double delta = 0.0;         // step size in years
    std::size_t n_obs = 0;      // number of returns

    double mu() const { return mean_per_step / delta; }
    double sigma() const { return std_per_step / std::sqrt(delta); }
    double nu_delta() const { return std_per_step / delta; }  // sigma / sqrt(delta)
};

// Instantaneous up/down branch values of the matched two-point distribution.
struct UpDownFactors {
    double u = 0.0;
    double d = 0.0;
};

// r_{n+1} = (v_{n+1} - v_n) / v_n for consecutive observations.
std::vector<double> simple_returns(const ObservationSeries& series);

BinomialMoments estimate_moments(std::span<const double> returns, double delta);

// Matches (mu, nu_delta, p_up) exactly:
//   u = mu + sqrt((1-p)/p) nu,   d = mu - sqrt(p/(1-p)) nu
// so that p u + (1-p) d = mu and sqrt(p(1-p)) (u - d) = nu.
UpDownFactors solve_up_down(const BinomialMoments& moments);

}  // namespace bondlens
