#include "bondlens/bondpricer.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bondlens/csv.hpp"
#include "bondlens/errors.hpp"

namespace bondlens {

namespace {

constexpr double kProbEps = 1e-12;

void check_equity(const EquityParams& equity) {
    if (!(equity.sigma > 0.0))
        throw Error(ErrorCode::bad_argument,
                    "sigma must be positive, got " + csv::format_double(equity.sigma));
    if (!(equity.p >= 0.0 && equity.p <= 1.0))
        throw Error(ErrorCode::probability_range,
                    "p must lie in [0,1], got " + csv::format_double(equity.p));
}

void check_maturity(const RateLattice& lattice, std::size_t maturity_steps) {
    if (maturity_steps < 1)
        throw Error(ErrorCode::bad_argument, "maturity_steps must be at least 1");
    if (maturity_steps > lattice.n_steps)
        throw Error(ErrorCode::index_out_of_range,
                    "maturity_steps " + std::to_string(maturity_steps) +
                        " exceeds lattice depth " + std::to_string(lattice.n_steps));
}

double apply_policy(double ptilde, const PricingPolicy& policy, PricingDiagnostics* diagnostics,
                    const std::string& where) {
    if (ptilde >= 0.0 && ptilde <= 1.0) return ptilde;
    if (policy.out_of_range == PricingPolicy::OutOfRange::error)
        throw Error(ErrorCode::probability_range,
                    "risk-neutral probability " + csv::format_double(ptilde) +
                        " outside [0,1]" + where);
    if (diagnostics) ++diagnostics->clamped_nodes;
    return std::clamp(ptilde, kProbEps, 1.0 - kProbEps);
}

}  // namespace

double ptilde_from_theta(double p, double theta, double delta) {
    if (!(delta > 0.0)) throw Error(ErrorCode::bad_argument, "delta must be positive");
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::probability_range,
                    "p must lie in [0,1], got " + csv::format_double(p));
    return p - theta * std::sqrt(p * (1.0 - p) * delta);
}

double risk_neutral_prob(const EquityParams& equity, double rate, double delta,
                         const PricingPolicy& policy, PricingDiagnostics* diagnostics) {
    check_equity(equity);
    const double theta = (equity.mu - rate) / equity.sigma;
    const double raw = ptilde_from_theta(equity.p, theta, delta);
    return apply_policy(raw, policy, diagnostics, "");
}

double price_zcb(const RateLattice& lattice, const EquityParams& equity,
                 std::size_t maturity_steps, const PricingPolicy& policy,
                 PricingDiagnostics* diagnostics) {
    check_equity(equity);
    check_maturity(lattice, maturity_steps);
    const auto& cal = lattice.calibration;
    const double delta = cal.delta;

    // The tilt is affine in the theta rate: pt = p - (mu - R)/sigma * root
    //                                          = (p - mu slope) + slope R.
    const double root = std::sqrt(equity.p * (1.0 - equity.p) * delta);
    const double slope = root / equity.sigma;
    const double offset = equity.p - equity.mu * slope;

    std::vector<double> value(maturity_steps + 1, 1.0);
    for (std::size_t n = maturity_steps; n-- > 0;) {
        // Rate at (n,0), then multiply by c2 along the slice.
        double rate = cal.r0 * std::exp(-static_cast<double>(n) * cal.log_c1);
        for (std::size_t k = 0; k <= n; ++k) {
            const double theta_rate = policy.theta_rate ? *policy.theta_rate : rate;
            double pt = offset + slope * theta_rate;
            if (!(pt >= 0.0 && pt <= 1.0))
                pt = apply_policy(pt, policy, diagnostics,
                                  " at node (" + std::to_string(n) + "," + std::to_string(k) + ")");
            value[k] = (value[k] + pt * (value[k + 1] - value[k])) / (1.0 + rate * delta);
            rate *= cal.c2;
        }
    }
    return value[0];
}

double price_zcb_const(const RateLattice& lattice, double ptilde, std::size_t maturity_steps) {
    if (!(ptilde >= 0.0 && ptilde <= 1.0))
        throw Error(ErrorCode::probability_range,
                    "ptilde must lie in [0,1], got " + csv::format_double(ptilde));
    check_maturity(lattice, maturity_steps);
    const auto& cal = lattice.calibration;
    const double delta = cal.delta;

    std::vector<double> value(maturity_steps + 1, 1.0);
    for (std::size_t n = maturity_steps; n-- > 0;) {
        double rate = cal.r0 * std::exp(-static_cast<double>(n) * cal.log_c1);
        for (std::size_t k = 0; k <= n; ++k) {
            value[k] = (value[k] + ptilde * (value[k + 1] - value[k])) / (1.0 + rate * delta);
            rate *= cal.c2;
        }
    }
    return value[0];
}

double price_zcb_oracle(const RateLattice& lattice,
                        const std::function<double(std::size_t, std::size_t)>& ptilde_at,
                        std::size_t maturity_steps) {
    check_maturity(lattice, maturity_steps);
    if (maturity_steps > 20)
        throw Error(ErrorCode::oracle_size,
                    "path enumeration is capped at 20 steps, got " +
                        std::to_string(maturity_steps));
    const double delta = lattice.calibration.delta;

    // Kahan-compensated sum over all 2^N paths; each term is the path
    // probability times the path's accumulated discount.
    double sum = 0.0;
    double comp = 0.0;
    const std::uint64_t paths = std::uint64_t{1} << maturity_steps;
    for (std::uint64_t mask = 0; mask < paths; ++mask) {
        double weight = 1.0;
        std::size_t k = 0;
        for (std::size_t n = 0; n < maturity_steps; ++n) {
            const double rate = rate_at(lattice, n, k);
            const double pt = ptilde_at(n, k);
            if (!(pt >= 0.0 && pt <= 1.0))
                throw Error(ErrorCode::probability_range,
                            "oracle probability " + csv::format_double(pt) +
                                " outside [0,1] at node (" + std::to_string(n) + "," +
                                std::to_string(k) + ")");
            const bool up = (mask >> n) & 1;
            weight *= (up ? pt : 1.0 - pt) / (1.0 + rate * delta);
            if (up) ++k;
        }
        const double y = weight - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double market_zcb_price(const YieldCurve& curve, double t, double T) {
    if (!(T >= t))
        throw Error(ErrorCode::bad_argument, "maturity precedes the valuation date");
    const double horizon = T - t;
    if (horizon == 0.0) return 1.0;
    return std::exp(-horizon * yield_at(curve, horizon));
}

}  // namespace bondlens
