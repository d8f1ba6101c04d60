#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bondlens/bdt.hpp"
#include "bondlens/bondpricer.hpp"
#include "bondlens/marketdata.hpp"

namespace bondlens {

struct SolveDiagnostics {
    std::size_t iterations = 0;
    double residual = 0.0;
};

struct PtildeSolution {
    double ptilde = 0.0;
    SolveDiagnostics diagnostics;
};

// Bisection on [0,1] for the constant risk-neutral probability that
// reprices target_price over n_steps. Relies on the monotonicity of
// price_zcb_const in ptilde; targets matching an endpoint price return that
// endpoint directly. At most 200 iterations.
PtildeSolution solve_ptilde(const RateLattice& lattice, double target_price,
                            std::size_t n_steps, double tol);

// mu = sigma (p - ptilde) / sqrt(p (1-p) delta) + rate
double implied_mu(double ptilde, double p, double sigma, double rate, double delta);

struct ImpliedSigma {
    double sigma = 0.0;
    bool valid = false;  // false when the algebra yields sigma <= 0
};

// sigma = (mu - rate) sqrt(p (1-p) delta) / (p - ptilde); p == ptilde is
// refused as indeterminate.
ImpliedSigma implied_sigma(double ptilde, double p, double mu, double rate, double delta);

struct RootFlags {
    double minus_root = 0.0;
    double plus_root = 0.0;
    bool plus_in_unit_interval = false;  // plus root strictly inside (0,1)
    bool used_plus_branch = false;
    double residual = 0.0;  // defining-equation residual of the chosen root
};

struct ImpliedP {
    double p = 0.0;
    RootFlags flags;
};

// Inverts ptilde = p - theta sqrt(p (1-p) delta) for p. Squaring gives the
// quadratic (1 + a) p^2 - (2 ptilde + a) p + ptilde^2 = 0 with a = theta^2
// delta, whose roots straddle ptilde; only one of them satisfies the signed
// equation, so both are checked against it and the reproducing root is
// returned (the minus root on ties). Both roots failing is a wrong-branch
// error reporting the pair.
ImpliedP implied_p(double ptilde, double theta, double delta);

struct ImpliedPoint {
    double maturity_years = 0.0;
    std::size_t n_steps = 0;
    double market_price = 0.0;
    double ptilde = 0.0;
    std::optional<double> mu;
    std::optional<double> sigma;
    std::optional<double> p;
    SolveDiagnostics solve;
    std::string flags;                // semicolon-separated markers
    std::optional<std::string> error; // set when this maturity failed
};

// Term-structure sweep. For each grid maturity T: N = max(1, round(T/delta))
// steps, market price from the curve, ptilde solved by bisection, then
// mapped to implied (mu, sigma, p) around the baseline parameters with
// theta evaluated at rate_for_theta. Failures are recorded per point and
// the sweep continues; results follow the input grid order.
std::vector<ImpliedPoint> build_implied_curves(const YieldCurve& curve,
                                               const BdtCalibration& calibration,
                                               const EquityParams& baseline,
                                               double rate_for_theta,
                                               std::span<const double> maturities,
                                               double tol);

}  // namespace bondlens
