#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "bondlens/bdt.hpp"
#include "bondlens/marketdata.hpp"

namespace bondlens {

// Instantaneous drift, volatility, and natural up-move probability of the
// traded asset the pricing measure is tilted toward.
struct EquityParams {
    double mu = 0.0;
    double sigma = 0.0;
    double p = 0.0;
};

struct PricingPolicy {
    enum class OutOfRange { error, clamp };

    // What to do when the tilted probability leaves [0,1]: refuse, or clamp
    // into [eps, 1-eps] and count the node.
    OutOfRange out_of_range = OutOfRange::error;

    // Rate used inside theta. Unset means each node's own rate.
    std::optional<double> theta_rate;
};

struct PricingDiagnostics {
    std::size_t clamped_nodes = 0;
};

// ptilde = p - theta sqrt(p (1-p) delta), with no range policing. This is
// the raw tilt; callers that need [0,1] enforcement go through
// risk_neutral_prob or the pricer policies.
double ptilde_from_theta(double p, double theta, double delta);

// Tilted up probability at a given reference rate, theta = (mu - rate)/sigma,
// with the policy applied to out-of-range results.
double risk_neutral_prob(const EquityParams& equity, double rate, double delta,
                         const PricingPolicy& policy,
                         PricingDiagnostics* diagnostics = nullptr);

// Zero-coupon bond price by backward induction over the lattice:
//   B(n,k) = [pt B(n+1,k+1) + (1-pt) B(n+1,k)] / (1 + R(n,k) delta)
// from B(N,.) = 1, with pt tilted at each node's rate (or the policy's
// fixed theta rate). Uses a single rolling buffer of N+1 values.
double price_zcb(const RateLattice& lattice, const EquityParams& equity,
                 std::size_t maturity_steps, const PricingPolicy& policy,
                 PricingDiagnostics* diagnostics = nullptr);

// Same induction with one constant risk-neutral probability.
double price_zcb_const(const RateLattice& lattice, double ptilde,
                       std::size_t maturity_steps);

// Exhaustive enumeration of all 2^N up/down paths, summing each path's
// probability times its accumulated discount. Reference implementation;
// capped at N <= 20 and kept independent of the induction code above.
double price_zcb_oracle(const RateLattice& lattice,
                        const std::function<double(std::size_t, std::size_t)>& ptilde_at,
                        std::size_t maturity_steps);

// Discount factor implied by the quoted curve: exp(-(T-t) Y) with Y read at
// time to maturity T-t. A zero horizon prices to exactly 1.
double market_zcb_price(const YieldCurve& curve, double t, double T);

}  // namespace bondlens
