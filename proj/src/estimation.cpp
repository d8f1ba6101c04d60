#include "bondlens/estimation.hpp"

#include <cmath>

#include "bondlens/errors.hpp"
#include "bondlens/marketdata.hpp"

namespace bondlens {

std::vector<double> simple_returns(const ObservationSeries& series) {
    const auto& entries = series.entries;
    if (entries.size() < 2)
        throw Error(ErrorCode::insufficient_data,
                    "need at least 2 observations to form returns, got " +
                        std::to_string(entries.size()));
    std::vector<double> returns;
    returns.reserve(entries.size() - 1);
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
        if (entries[i].value == 0.0)
            throw Error(ErrorCode::division_by_zero,
                        "zero value on " + entries[i].date.iso() +
                            " cannot be a return denominator");
        returns.push_back((entries[i + 1].value - entries[i].value) / entries[i].value);
    }
    return returns;
}

BinomialMoments estimate_moments(std::span<const double> returns, double delta) {
    if (!(delta > 0.0))
        throw Error(ErrorCode::bad_argument, "delta must be positive");
    if (returns.empty())
        throw Error(ErrorCode::insufficient_data, "no returns to estimate from");

    const auto n = returns.size();
    double mean = 0.0;
    for (const double r : returns) mean += r;
    mean /= static_cast<double>(n);

    double ss = 0.0;
    std::size_t ups = 0;
    for (const double r : returns) {
        const double d = r - mean;
        ss += d * d;
        if (r > 0.0) ++ups;
    }
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

    BinomialMoments moments;
    moments.mean_per_step = mean;
    moments.std_per_step = sd;
    moments.p_up = static_cast<double>(ups) / static_cast<double>(n);
    moments.delta = delta;
    moments.n_obs = n;
    return moments;
}

UpDownFactors solve_up_down(const BinomialMoments& moments) {
    if (!(moments.delta > 0.0))
        throw Error(ErrorCode::bad_argument, "delta must be positive");
    const double mu = moments.mu();
    if (moments.std_per_step == 0.0) return {mu, mu};  // branches collapse

    const double p = moments.p_up;
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::degenerate_probability,
                    "p_up must lie strictly inside (0,1) when volatility is positive, got " +
                        std::to_string(p));
    const double q = 1.0 - p;
    const double nu = moments.nu_delta();
    return {mu + std::sqrt(q / p) * nu, mu - std::sqrt(p / q) * nu};
}

}  // namespace bondlens
