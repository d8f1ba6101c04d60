#include "bondlens/inversion.hpp"

#include <cmath>
#include <limits>

#include "bondlens/csv.hpp"
#include "bondlens/errors.hpp"

namespace bondlens {

namespace {

constexpr std::size_t kMaxBisectionIterations = 200;
constexpr double kBranchResidualTol = 1e-8;

void check_delta(double delta) {
    if (!(delta > 0.0)) throw Error(ErrorCode::bad_argument, "delta must be positive");
}

void check_interior_p(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::degenerate_probability,
                    "p must lie strictly inside (0,1), got " + csv::format_double(p));
}

}  // namespace

PtildeSolution solve_ptilde(const RateLattice& lattice, double target_price,
                            std::size_t n_steps, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::bad_argument, "tol must be positive");
    if (!(target_price > 0.0))
        throw Error(ErrorCode::bad_argument,
                    "target price must be positive, got " + csv::format_double(target_price));

    const double price_at_zero = price_zcb_const(lattice, 0.0, n_steps);
    const double price_at_one = price_zcb_const(lattice, 1.0, n_steps);
    if (target_price == price_at_zero) return {0.0, {0, 0.0}};
    if (target_price == price_at_one) return {1.0, {0, 0.0}};
    if (price_at_zero == price_at_one)
        throw Error(ErrorCode::non_identifiable,
                    "price does not depend on the risk-neutral probability (endpoint prices "
                    "both equal " +
                        csv::format_double(price_at_zero) + ")");

    double f_lo = price_at_zero - target_price;
    const double f_hi = price_at_one - target_price;
    if ((f_lo > 0.0) == (f_hi > 0.0))
        throw Error(ErrorCode::unattainable_price,
                    "target price " + csv::format_double(target_price) +
                        " outside the attainable range [" +
                        csv::format_double(std::min(price_at_zero, price_at_one)) + ", " +
                        csv::format_double(std::max(price_at_zero, price_at_one)) + "]");

    double lo = 0.0;
    double hi = 1.0;
    std::size_t iterations = 0;
    double best = 0.5;
    double best_residual = std::numeric_limits<double>::infinity();
    while (iterations < kMaxBisectionIterations) {
        ++iterations;
        const double mid = 0.5 * (lo + hi);
        const double f_mid = price_zcb_const(lattice, mid, n_steps) - target_price;
        const double residual = std::abs(f_mid);
        if (residual < best_residual) {
            best = mid;
            best_residual = residual;
        }
        if (residual <= tol) return {mid, {iterations, residual}};
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= mid * std::numeric_limits<double>::epsilon()) break;  // bracket exhausted
    }
    throw Error(ErrorCode::numeric_domain,
                "bisection did not reach tolerance " + csv::format_double(tol) + " after " +
                    std::to_string(iterations) + " iterations (best residual " +
                    csv::format_double(best_residual) + " at ptilde " + csv::format_double(best) +
                    ")");
}

double implied_mu(double ptilde, double p, double sigma, double rate, double delta) {
    check_delta(delta);
    check_interior_p(p);
    if (!(sigma > 0.0)) throw Error(ErrorCode::bad_argument, "sigma must be positive");
    return sigma * (p - ptilde) / std::sqrt(p * (1.0 - p) * delta) + rate;
}

ImpliedSigma implied_sigma(double ptilde, double p, double mu, double rate, double delta) {
    check_delta(delta);
    check_interior_p(p);
    if (ptilde == p)
        throw Error(ErrorCode::indeterminate_sigma,
                    "ptilde equals p; the volatility is not identified");
    const double sigma = (mu - rate) * std::sqrt(p * (1.0 - p) * delta) / (p - ptilde);
    return {sigma, sigma > 0.0};
}

ImpliedP implied_p(double ptilde, double theta, double delta) {
    check_delta(delta);
    if (!(ptilde >= 0.0 && ptilde <= 1.0))
        throw Error(ErrorCode::probability_range,
                    "ptilde must lie in [0,1], got " + csv::format_double(ptilde));

    const double a = theta * theta * delta;
    double minus_root, plus_root;
    if (a == 0.0) {
        minus_root = plus_root = ptilde;
    } else {
        const double disc = a * (a + 4.0 * ptilde * (1.0 - ptilde));
        const double sq = std::sqrt(disc);
        plus_root = ((2.0 * ptilde + a) + sq) / (2.0 * (1.0 + a));
        // The roots multiply to ptilde^2/(1+a); dividing avoids the
        // subtractive cancellation of the textbook minus formula.
        minus_root = plus_root > 0.0 ? (ptilde * ptilde) / ((1.0 + a) * plus_root) : 0.0;
    }

    const auto residual_of = [&](double root) {
        const double p = std::clamp(root, 0.0, 1.0);
        return std::abs(p - theta * std::sqrt(p * (1.0 - p) * delta) - ptilde);
    };
    const double r_minus = residual_of(minus_root);
    const double r_plus = residual_of(plus_root);

    ImpliedP out;
    out.flags.minus_root = minus_root;
    out.flags.plus_root = plus_root;
    out.flags.plus_in_unit_interval = plus_root > 0.0 && plus_root < 1.0;
    out.flags.used_plus_branch = r_plus < r_minus;
    out.flags.residual = out.flags.used_plus_branch ? r_plus : r_minus;
    if (out.flags.residual > kBranchResidualTol)
        throw Error(ErrorCode::wrong_branch,
                    "neither quadratic root reproduces ptilde " + csv::format_double(ptilde) +
                        ": minus root " + csv::format_double(minus_root) + " (residual " +
                        csv::format_double(r_minus) + "), plus root " +
                        csv::format_double(plus_root) + " (residual " +
                        csv::format_double(r_plus) + ")");
    const double chosen = out.flags.used_plus_branch ? plus_root : minus_root;
    out.p = std::clamp(chosen, 0.0, 1.0);
    return out;
}

std::vector<ImpliedPoint> build_implied_curves(const YieldCurve& curve,
                                               const BdtCalibration& calibration,
                                               const EquityParams& baseline,
                                               double rate_for_theta,
                                               std::span<const double> maturities,
                                               double tol) {
    if (!(baseline.sigma > 0.0))
        throw Error(ErrorCode::bad_argument, "baseline sigma must be positive");
    check_interior_p(baseline.p);
    check_delta(calibration.delta);

    std::vector<ImpliedPoint> out(maturities.size());
    for (std::size_t i = 0; i < maturities.size(); ++i) {
        ImpliedPoint& point = out[i];
        const double maturity = maturities[i];
        point.maturity_years = maturity;
        std::vector<std::string> flags;
        try {
            if (!(maturity > 0.0))
                throw Error(ErrorCode::bad_argument,
                            "maturity must be positive, got " + csv::format_double(maturity));
            const auto n_steps = static_cast<std::size_t>(
                std::max<long long>(1, std::llround(maturity / calibration.delta)));
            point.n_steps = n_steps;
            const RateLattice lattice{calibration, n_steps};

            point.market_price = market_zcb_price(curve, 0.0, maturity);
            const PtildeSolution solution =
                solve_ptilde(lattice, point.market_price, n_steps, tol);
            point.ptilde = solution.ptilde;
            point.solve = solution.diagnostics;

            point.mu = implied_mu(solution.ptilde, baseline.p, baseline.sigma, rate_for_theta,
                                  calibration.delta);

            if (solution.ptilde == baseline.p) {
                flags.push_back("sigma_indeterminate");
            } else {
                const ImpliedSigma sig = implied_sigma(solution.ptilde, baseline.p, baseline.mu,
                                                       rate_for_theta, calibration.delta);
                if (sig.valid)
                    point.sigma = sig.sigma;
                else
                    flags.push_back("sigma_invalid");
            }

            const double theta = (baseline.mu - rate_for_theta) / baseline.sigma;
            const ImpliedP implied = implied_p(solution.ptilde, theta, calibration.delta);
            point.p = implied.p;
            flags.push_back(implied.flags.used_plus_branch ? "p_root=plus" : "p_root=minus");
            if (implied.flags.plus_in_unit_interval) flags.push_back("p_plus_in_range");
        } catch (const Error& err) {
            point.error = err.what();
            flags.push_back("error");
        }
        std::string joined;
        for (const auto& flag : flags) {
            if (!joined.empty()) joined += ';';
            joined += flag;
        }
        point.flags = joined;
    }
    return out;
}

}  // namespace bondlens
