// Python bindings for the numeric core: moment estimation, lattice
// calibration, tilted backward-induction pricing, and the implied parameter
// inversions. File parsing and report formatting stay in the CLI.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>
#include <vector>

#include "bondlens/bdt.hpp"
#include "bondlens/bondpricer.hpp"
#include "bondlens/errors.hpp"
#include "bondlens/estimation.hpp"
#include "bondlens/inversion.hpp"
#include "bondlens/marketdata.hpp"

namespace py = pybind11;
using namespace bondlens;

#ifndef BONDLENS_VERSION
#define BONDLENS_VERSION "0.0.0"
#endif

PYBIND11_MODULE(_core, m) {
    m.doc() = "Binomial short-rate lattice calibration, bond pricing, and "
              "implied equity-parameter inversion";
    m.attr("__version__") = BONDLENS_VERSION;

    py::register_exception<Error>(m, "BondlensError");

    // ---- estimation ----
    py::class_<BinomialMoments>(m, "BinomialMoments")
        .def(py::init<>())
        .def_readwrite("mean_per_step", &BinomialMoments::mean_per_step)
        .def_readwrite("std_per_step", &BinomialMoments::std_per_step)
        .def_readwrite("p_up", &BinomialMoments::p_up)
        .def_readwrite("delta", &BinomialMoments::delta)
        .def_readwrite("n_obs", &BinomialMoments::n_obs)
        .def("mu", &BinomialMoments::mu)
        .def("sigma", &BinomialMoments::sigma)
        .def("nu_delta", &BinomialMoments::nu_delta)
        .def("__repr__", [](const BinomialMoments& mo) {
            return "BinomialMoments(mean_per_step=" + std::to_string(mo.mean_per_step) +
                   ", std_per_step=" + std::to_string(mo.std_per_step) +
                   ", p_up=" + std::to_string(mo.p_up) + ")";
        });

    py::class_<UpDownFactors>(m, "UpDownFactors")
        .def_readonly("u", &UpDownFactors::u)
        .def_readonly("d", &UpDownFactors::d);

    m.def(
        "estimate_moments",
        [](const std::vector<double>& returns, double delta) {
            return estimate_moments(returns, delta);
        },
        py::arg("returns"), py::arg("delta") = 1.0 / 252.0,
        "Per-step mean, sample standard deviation, and up fraction of a return series");
    m.def("solve_up_down", &solve_up_down, py::arg("moments"),
          "Two-point branch values matching (mu, nu_delta, p_up) exactly");

    // ---- lattice ----
    py::class_<BdtCalibration>(m, "BdtCalibration")
        .def_readonly("r0", &BdtCalibration::r0)
        .def_readonly("c1", &BdtCalibration::c1)
        .def_readonly("c2", &BdtCalibration::c2)
        .def_readonly("delta", &BdtCalibration::delta)
        .def_readonly("rate_moments", &BdtCalibration::rate_moments)
        .def("__repr__", [](const BdtCalibration& cal) {
            return "BdtCalibration(r0=" + std::to_string(cal.r0) + ", c1=" + std::to_string(cal.c1) +
                   ", c2=" + std::to_string(cal.c2) + ", delta=" + std::to_string(cal.delta) + ")";
        });

    m.def("calibrate_bdt", &calibrate_bdt, py::arg("rate_moments"), py::arg("r0"),
          "Lattice coefficients from per-step rate moments");
    m.def("make_calibration", &make_calibration, py::arg("r0"), py::arg("c1"), py::arg("c2"),
          py::arg("delta"), py::arg("p_up") = 0.5,
          "Calibration from known coefficients; moments are reconstructed");

    py::class_<RateLattice>(m, "RateLattice")
        .def(py::init<BdtCalibration, std::size_t>(), py::arg("calibration"), py::arg("n_steps"))
        .def_readonly("calibration", &RateLattice::calibration)
        .def_readonly("n_steps", &RateLattice::n_steps);

    m.def("rate_at", &rate_at, py::arg("lattice"), py::arg("n"), py::arg("k"),
          "Short rate after n steps of which k were up moves");
    m.def("simulate_path", &simulate_path, py::arg("calibration"), py::arg("n_steps"),
          py::arg("p_up"), py::arg("seed"),
          "Seeded random walk over lattice transitions; n_steps + 1 values");

    // ---- market curve ----
    py::class_<CurvePoint>(m, "CurvePoint")
        .def(py::init([](double maturity_years, double yield) {
                 CurvePoint point;
                 point.maturity_years = maturity_years;
                 point.yield = yield;
                 return point;
             }),
             py::arg("maturity_years"), py::arg("yield"))
        .def_readwrite("maturity_years", &CurvePoint::maturity_years)
        .def_readwrite("yield_", &CurvePoint::yield);

    py::class_<YieldCurve>(m, "YieldCurve")
        .def(py::init([](const std::vector<std::pair<double, double>>& quotes) {
                 YieldCurve curve;
                 for (const auto& [t, y] : quotes) {
                     CurvePoint point;
                     point.maturity_years = t;
                     point.yield = y;
                     curve.points.push_back(point);
                 }
                 return curve;
             }),
             py::arg("quotes"), "Curve from (maturity_years, yield) pairs")
        .def_readwrite("points", &YieldCurve::points);

    m.def("yield_at", &yield_at, py::arg("curve"), py::arg("maturity_years"),
          "Linear interpolation; refuses to extrapolate");
    m.def("market_zcb_price", &market_zcb_price, py::arg("curve"), py::arg("t"), py::arg("T"),
          "Discount factor exp(-(T-t) Y) at the quoted curve");

    // ---- pricing ----
    py::class_<EquityParams>(m, "EquityParams")
        .def(py::init([](double mu, double sigma, double p) {
                 EquityParams equity;
                 equity.mu = mu;
                 equity.sigma = sigma;
                 equity.p = p;
                 return equity;
             }),
             py::arg("mu"), py::arg("sigma"), py::arg("p"))
        .def_readwrite("mu", &EquityParams::mu)
        .def_readwrite("sigma", &EquityParams::sigma)
        .def_readwrite("p", &EquityParams::p)
        .def("__repr__", [](const EquityParams& equity) {
            return "EquityParams(mu=" + std::to_string(equity.mu) +
                   ", sigma=" + std::to_string(equity.sigma) + ", p=" + std::to_string(equity.p) + ")";
        });

    py::class_<PricingPolicy> policy(m, "PricingPolicy");
    py::enum_<PricingPolicy::OutOfRange>(policy, "OutOfRange")
        .value("error", PricingPolicy::OutOfRange::error)
        .value("clamp", PricingPolicy::OutOfRange::clamp);
    policy.def(py::init<>())
        .def_readwrite("out_of_range", &PricingPolicy::out_of_range)
        .def_readwrite("theta_rate", &PricingPolicy::theta_rate);

    py::class_<PricingDiagnostics>(m, "PricingDiagnostics")
        .def(py::init<>())
        .def_readwrite("clamped_nodes", &PricingDiagnostics::clamped_nodes);

    m.def("ptilde_from_theta", &ptilde_from_theta, py::arg("p"), py::arg("theta"), py::arg("delta"),
          "Tilted up probability p - theta sqrt(p (1-p) delta)");
    m.def("risk_neutral_prob", &risk_neutral_prob, py::arg("equity"), py::arg("rate"),
          py::arg("delta"), py::arg("policy") = PricingPolicy{},
          py::arg("diagnostics") = static_cast<PricingDiagnostics*>(nullptr),
          "Tilt at a reference rate with theta = (mu - rate) / sigma");
    m.def("price_zcb", &price_zcb, py::arg("lattice"), py::arg("equity"),
          py::arg("maturity_steps"), py::arg("policy") = PricingPolicy{},
          py::arg("diagnostics") = static_cast<PricingDiagnostics*>(nullptr),
          "Zero-coupon bond price by backward induction with node-dependent tilts");
    m.def("price_zcb_const", &price_zcb_const, py::arg("lattice"), py::arg("ptilde"),
          py::arg("maturity_steps"), "Backward induction with one constant tilt probability");
    m.def("price_zcb_oracle", &price_zcb_oracle, py::arg("lattice"), py::arg("ptilde_at"),
          py::arg("maturity_steps"),
          "Exhaustive 2^N path enumeration; reference implementation, N <= 20");

    // ---- inversion ----
    py::class_<SolveDiagnostics>(m, "SolveDiagnostics")
        .def_readonly("iterations", &SolveDiagnostics::iterations)
        .def_readonly("residual", &SolveDiagnostics::residual);

    py::class_<PtildeSolution>(m, "PtildeSolution")
        .def_readonly("ptilde", &PtildeSolution::ptilde)
        .def_readonly("diagnostics", &PtildeSolution::diagnostics);

    m.def("solve_ptilde", &solve_ptilde, py::arg("lattice"), py::arg("target_price"),
          py::arg("n_steps"), py::arg("tol"),
          "Bisection for the constant tilt reproducing a market price");

    py::class_<ImpliedSigma>(m, "ImpliedSigma")
        .def_readonly("sigma", &ImpliedSigma::sigma)
        .def_readonly("valid", &ImpliedSigma::valid);

    py::class_<RootFlags>(m, "RootFlags")
        .def_readonly("minus_root", &RootFlags::minus_root)
        .def_readonly("plus_root", &RootFlags::plus_root)
        .def_readonly("plus_in_unit_interval", &RootFlags::plus_in_unit_interval)
        .def_readonly("used_plus_branch", &RootFlags::used_plus_branch)
        .def_readonly("residual", &RootFlags::residual);

    py::class_<ImpliedP>(m, "ImpliedP")
        .def_readonly("p", &ImpliedP::p)
        .def_readonly("flags", &ImpliedP::flags);

    m.def("implied_mu", &implied_mu, py::arg("ptilde"), py::arg("p"), py::arg("sigma"),
          py::arg("rate"), py::arg("delta"), "Drift consistent with an observed tilt");
    m.def("implied_sigma", &implied_sigma, py::arg("ptilde"), py::arg("p"), py::arg("mu"),
          py::arg("rate"), py::arg("delta"), "Volatility consistent with an observed tilt");
    m.def("implied_p", &implied_p, py::arg("ptilde"), py::arg("theta"), py::arg("delta"),
          "Physical up probability from the tilt quadratic");

    py::class_<ImpliedPoint>(m, "ImpliedPoint")
        .def_readonly("maturity_years", &ImpliedPoint::maturity_years)
        .def_readonly("n_steps", &ImpliedPoint::n_steps)
        .def_readonly("market_price", &ImpliedPoint::market_price)
        .def_readonly("ptilde", &ImpliedPoint::ptilde)
        .def_readonly("mu", &ImpliedPoint::mu)
        .def_readonly("sigma", &ImpliedPoint::sigma)
        .def_readonly("p", &ImpliedPoint::p)
        .def_readonly("solve", &ImpliedPoint::solve)
        .def_readonly("flags", &ImpliedPoint::flags)
        .def_readonly("error", &ImpliedPoint::error)
        .def("__repr__", [](const ImpliedPoint& point) {
            return "ImpliedPoint(T=" + std::to_string(point.maturity_years) +
                   ", ptilde=" + std::to_string(point.ptilde) +
                   (point.error ? ", error=" + *point.error : std::string()) + ")";
        });

    m.def(
        "build_implied_curves",
        [](const YieldCurve& curve, const BdtCalibration& calibration, const EquityParams& baseline,
           double rate_for_theta, const std::vector<double>& maturities, double tol) {
            return build_implied_curves(curve, calibration, baseline, rate_for_theta, maturities, tol);
        },
        py::arg("curve"), py::arg("calibration"), py::arg("baseline"), py::arg("rate_for_theta"),
        py::arg("maturities"), py::arg("tol") = 1e-12,
        "Implied (mu, sigma, p) term structures from a quoted yield curve");
}
