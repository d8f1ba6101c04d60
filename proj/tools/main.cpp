// bondlens command-line front end: ingestion -> estimation -> calibration ->
// pricing -> inversion, emitting plot-ready CSV or JSON.
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bondlens/bdt.hpp"
#include "bondlens/bondpricer.hpp"
#include "bondlens/csv.hpp"
#include "bondlens/errors.hpp"
#include "bondlens/estimation.hpp"
#include "bondlens/inversion.hpp"
#include "bondlens/marketdata.hpp"

using namespace bondlens;

namespace {

// ---------------------------------------------------------------------------
// report plumbing

struct Cell {
    enum class Kind { empty, number, integer, text };
    Kind kind = Kind::empty;
    double number = 0.0;
    long long integer = 0;
    std::string text;

    static Cell none() { return {}; }
    static Cell num(double x) {
        Cell c;
        c.kind = Kind::number;
        c.number = x;
        return c;
    }
    static Cell count(long long x) {
        Cell c;
        c.kind = Kind::integer;
        c.integer = x;
        return c;
    }
    static Cell str(std::string s) {
        Cell c;
        c.kind = Kind::text;
        c.text = std::move(s);
        return c;
    }
};

struct Report {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
    bool single = false;  // one logical record: JSON emits an object, not an array
};

void write_csv(std::ostream& out, const Report& report) {
    csv::write_row(out, report.header);
    std::vector<std::string> fields(report.header.size());
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            switch (row[i].kind) {
                case Cell::Kind::empty: fields[i].clear(); break;
                case Cell::Kind::number: fields[i] = csv::format_double(row[i].number); break;
                case Cell::Kind::integer: fields[i] = std::to_string(row[i].integer); break;
                case Cell::Kind::text: fields[i] = row[i].text; break;
            }
        }
        csv::write_row(out, fields);
    }
}

void write_json(std::ostream& out, const Report& report) {
    auto to_json = [&](const std::vector<Cell>& row) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto& key = report.header[i];
            switch (row[i].kind) {
                case Cell::Kind::empty: obj[key] = nullptr; break;
                case Cell::Kind::number: obj[key] = row[i].number; break;
                case Cell::Kind::integer: obj[key] = row[i].integer; break;
                case Cell::Kind::text: obj[key] = row[i].text; break;
            }
        }
        return obj;
    };

    nlohmann::ordered_json doc;
    if (report.single && report.rows.size() == 1) {
        doc = to_json(report.rows.front());
    } else {
        doc = nlohmann::ordered_json::array();
        for (const auto& row : report.rows) doc.push_back(to_json(row));
    }
    out << doc.dump(2) << '\n';
}

void deliver(const Report& report, const std::string& format, const std::string& out_path) {
    if (out_path.empty()) {
        format == "json" ? write_json(std::cout, report) : write_csv(std::cout, report);
        return;
    }
    std::ofstream out(out_path);
    if (!out)
        throw Error(ErrorCode::io, "cannot open output file: " + out_path);
    format == "json" ? write_json(out, report) : write_csv(out, report);
}

// ---------------------------------------------------------------------------
// input plumbing

double parse_number(const std::string& text, const std::string& what) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw Error(ErrorCode::bad_argument, what + " is not a number: '" + text + "'");
    return value;
}

struct SeriesOpts {
    std::string input;
    std::string kind = "rate";
    std::string date_col;
    std::string value_col;
    std::string date_format = "%Y-%m-%d";
    bool percent = false;
    double delta = 1.0 / 252.0;
};

SeriesKind kind_of(const std::string& name) {
    if (name == "rate") return SeriesKind::rate;
    if (name == "price") return SeriesKind::price;
    if (name == "yield") return SeriesKind::yield;
    throw Error(ErrorCode::bad_argument, "unknown series kind '" + name + "'");
}

ParsedSeries load_series(const SeriesOpts& opts) {
    std::ifstream in(opts.input);
    if (!in)
        throw Error(ErrorCode::io, "cannot open input file: " + opts.input);
    SeriesSchema schema;
    schema.date_column = opts.date_col;
    schema.value_column = opts.value_col;
    schema.date_format = opts.date_format;
    schema.percent = opts.percent;
    return parse_series(in, kind_of(opts.kind), schema);
}

struct CurveOpts {
    std::string path;
    std::string maturity_col;
    std::string yield_col;
    bool percent = false;
};

YieldCurve load_curve(const CurveOpts& opts) {
    std::ifstream in(opts.path);
    if (!in)
        throw Error(ErrorCode::io, "cannot open yield curve file: " + opts.path);
    CurveSchema schema;
    schema.maturity_column = opts.maturity_col;
    schema.yield_column = opts.yield_col;
    schema.percent = opts.percent;
    return parse_yield_curve(in, schema);
}

struct LatticeOpts {
    SeriesOpts series;
    std::optional<double> r0;
    std::optional<double> c1;
    std::optional<double> c2;
};

enum class Anchor { last_observation, first_observation };

// A lattice comes either from a historical series (estimate then calibrate)
// or from explicit coefficients. Explicit c1/c2 override an estimated pair.
BdtCalibration build_calibration(const LatticeOpts& opts, Anchor anchor,
                                 ParsedSeries* parsed_out = nullptr) {
    if (!opts.series.input.empty()) {
        ParsedSeries parsed = load_series(opts.series);
        const auto& entries = parsed.series.entries;
        const auto returns = simple_returns(parsed.series);
        const auto moments = estimate_moments(returns, opts.series.delta);
        const double r0 = opts.r0 ? *opts.r0
                                  : (anchor == Anchor::first_observation
                                         ? entries.front().value
                                         : entries.back().value);
        if (parsed_out) *parsed_out = std::move(parsed);
        if (opts.c1 || opts.c2) {
            if (!(opts.c1 && opts.c2))
                throw Error(ErrorCode::bad_argument,
                            "coefficient overrides need both --c1 and --c2");
            return make_calibration(r0, *opts.c1, *opts.c2, opts.series.delta, moments.p_up);
        }
        return calibrate_bdt(moments, r0);
    }
    if (!(opts.r0 && opts.c1 && opts.c2))
        throw Error(ErrorCode::bad_argument,
                    "no --input series; provide all of --r0, --c1, and --c2");
    return make_calibration(*opts.r0, *opts.c1, *opts.c2, opts.series.delta);
}

// "node" -> nullopt (each node's own rate); "fixed:<r>" -> that rate.
std::optional<double> parse_theta_rate(const std::string& text, bool allow_node) {
    if (text == "node") {
        if (!allow_node)
            throw Error(ErrorCode::bad_argument,
                        "the implied-curve sweep needs one theta rate across maturities; "
                        "use --theta-rate fixed:<rate>");
        return std::nullopt;
    }
    const std::string prefix = "fixed:";
    if (text.rfind(prefix, 0) == 0)
        return parse_number(text.substr(prefix.size()), "--theta-rate value");
    throw Error(ErrorCode::bad_argument,
                "--theta-rate must be 'node' or 'fixed:<rate>', got '" + text + "'");
}

// "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::size_t begin = 0;
        for (std::size_t pos; (pos = text.find(':', begin)) != std::string::npos; begin = pos + 1)
            parts.push_back(text.substr(begin, pos - begin));
        parts.push_back(text.substr(begin));
        if (parts.size() != 3)
            throw Error(ErrorCode::bad_argument,
                        "--grid range form is start:stop:step, got '" + text + "'");
        const double start = parse_number(parts[0], "--grid start");
        const double stop = parse_number(parts[1], "--grid stop");
        const double step = parse_number(parts[2], "--grid step");
        if (!(step > 0.0) || stop < start)
            throw Error(ErrorCode::bad_argument,
                        "--grid needs step > 0 and stop >= start, got '" + text + "'");
        for (std::size_t k = 0;; ++k) {
            const double value = start + static_cast<double>(k) * step;
            if (value > stop + step * 1e-9) break;
            grid.push_back(value);
        }
    } else {
        std::size_t begin = 0;
        for (std::size_t pos; (pos = text.find(',', begin)) != std::string::npos; begin = pos + 1)
            grid.push_back(parse_number(text.substr(begin, pos - begin), "--grid entry"));
        grid.push_back(parse_number(text.substr(begin), "--grid entry"));
    }
    if (grid.empty())
        throw Error(ErrorCode::bad_argument, "--grid produced no maturities");
    return grid;
}

std::string python_quote(const std::string& path) {
    std::string quoted = "\"";
    for (const char ch : path) {
        if (ch == '\\' || ch == '"') quoted += '\\';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::io, "cannot open plot script file: " + path);
    out << content;
}

void emit_pair_plot_script(const std::string& script_path, const std::string& csv_path) {
    if (csv_path.empty())
        throw Error(ErrorCode::bad_argument,
                    "--plot-script needs --out so the script can locate the data file");
    write_text_file(script_path,
                    "#!/usr/bin/env python3\n"
                    "# Plots the market/model pair emitted next to this script.\n"
                    "import csv\n"
                    "import matplotlib.pyplot as plt\n"
                    "\n"
                    "with open(" + python_quote(csv_path) + ", newline=\"\") as fh:\n"
                    "    rows = list(csv.DictReader(fh))\n"
                    "x = range(len(rows))\n"
                    "labels = [r[\"date_or_step\"] for r in rows]\n"
                    "model = [float(r[\"model\"]) for r in rows]\n"
                    "fig, ax = plt.subplots(figsize=(10, 5))\n"
                    "if all(r[\"market\"] for r in rows):\n"
                    "    ax.plot(x, [float(r[\"market\"]) for r in rows], label=\"market\")\n"
                    "ax.plot(x, model, label=\"model\")\n"
                    "tick = max(1, len(rows) // 12)\n"
                    "ax.set_xticks(list(x)[::tick])\n"
                    "ax.set_xticklabels(labels[::tick], rotation=45, ha=\"right\")\n"
                    "ax.set_ylabel(\"rate\")\n"
                    "ax.legend()\n"
                    "fig.tight_layout()\n"
                    "plt.show()\n");
}

void emit_implied_plot_script(const std::string& script_path, const std::string& csv_path) {
    if (csv_path.empty())
        throw Error(ErrorCode::bad_argument,
                    "--plot-script needs --out so the script can locate the data file");
    write_text_file(script_path,
                    "#!/usr/bin/env python3\n"
                    "# Plots the implied parameter term structures emitted next to this script.\n"
                    "import csv\n"
                    "import matplotlib.pyplot as plt\n"
                    "\n"
                    "with open(" + python_quote(csv_path) + ", newline=\"\") as fh:\n"
                    "    rows = [r for r in csv.DictReader(fh) if \"error\" not in r[\"flags\"]]\n"
                    "t = [float(r[\"maturity_years\"]) for r in rows]\n"
                    "fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 10))\n"
                    "for ax, col in zip(axes, (\"implied_mu\", \"implied_sigma\", \"implied_p\")):\n"
                    "    pts = [(tt, float(r[col])) for tt, r in zip(t, rows) if r[col]]\n"
                    "    if pts:\n"
                    "        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=\"o\")\n"
                    "    ax.set_ylabel(col)\n"
                    "axes[-1].set_xlabel(\"maturity (years)\")\n"
                    "fig.tight_layout()\n"
                    "plt.show()\n");
}

// ---------------------------------------------------------------------------
// subcommands

struct IoOpts {
    std::string format = "csv";
    std::string out;
};

void run_estimate(const SeriesOpts& series, const IoOpts& io) {
    const ParsedSeries parsed = load_series(series);
    const auto returns = simple_returns(parsed.series);
    const auto m = estimate_moments(returns, series.delta);

    Report report;
    report.single = true;
    report.header = {"n_obs",  "skipped_rows", "delta", "mean_per_step", "std_per_step",
                     "p_up",   "mu",           "sigma", "nu_delta",      "value_column"};
    report.rows.push_back({Cell::count(static_cast<long long>(m.n_obs)),
                           Cell::count(static_cast<long long>(parsed.skipped_rows)),
                           Cell::num(m.delta), Cell::num(m.mean_per_step),
                           Cell::num(m.std_per_step), Cell::num(m.p_up), Cell::num(m.mu()),
                           Cell::num(m.sigma()), Cell::num(m.nu_delta()),
                           Cell::str(parsed.value_column_used)});
    deliver(report, io.format, io.out);
}

void run_calibrate(const LatticeOpts& lattice, const IoOpts& io) {
    if (lattice.series.input.empty())
        throw Error(ErrorCode::bad_argument, "calibrate needs an --input series");
    const BdtCalibration cal = build_calibration(lattice, Anchor::last_observation);

    Report report;
    report.single = true;
    report.header = {"r0",   "c1",           "c2",           "delta",
                     "p_up", "mean_per_step", "std_per_step", "n_obs"};
    const auto& m = cal.rate_moments;
    report.rows.push_back({Cell::num(cal.r0), Cell::num(cal.c1), Cell::num(cal.c2),
                           Cell::num(cal.delta), Cell::num(m.p_up), Cell::num(m.mean_per_step),
                           Cell::num(m.std_per_step),
                           Cell::count(static_cast<long long>(m.n_obs))});
    deliver(report, io.format, io.out);
}

void run_fit(const LatticeOpts& lattice, const IoOpts& io, const std::string& plot_script) {
    if (lattice.series.input.empty())
        throw Error(ErrorCode::bad_argument, "fit needs an --input series");
    ParsedSeries parsed;
    const BdtCalibration cal =
        build_calibration(lattice, Anchor::first_observation, &parsed);
    const auto fitted = fitted_series(cal, parsed.series);

    Report report;
    report.header = {"date_or_step", "market", "model"};
    for (const auto& point : fitted)
        report.rows.push_back(
            {Cell::str(point.date.iso()), Cell::num(point.market), Cell::num(point.model)});
    deliver(report, io.format, io.out);
    if (!plot_script.empty()) emit_pair_plot_script(plot_script, io.out);
}

struct PriceOpts {
    std::optional<double> maturity;
    std::optional<std::size_t> steps;
    std::optional<double> mu;
    std::optional<double> sigma;
    std::optional<double> p_up;
    std::optional<double> ptilde;
    std::string theta_rate = "node";
    std::string ptilde_policy = "error";
};

void run_price(const LatticeOpts& lattice_opts, const PriceOpts& price, const IoOpts& io) {
    const BdtCalibration cal = build_calibration(lattice_opts, Anchor::last_observation);

    if (price.maturity.has_value() == price.steps.has_value())
        throw Error(ErrorCode::bad_argument, "price needs exactly one of --maturity or --steps");
    std::size_t n_steps;
    double maturity_years;
    if (price.steps) {
        n_steps = *price.steps;
        maturity_years = static_cast<double>(n_steps) * cal.delta;
    } else {
        if (!(*price.maturity > 0.0))
            throw Error(ErrorCode::bad_argument, "--maturity must be positive");
        n_steps = static_cast<std::size_t>(
            std::max<long long>(1, std::llround(*price.maturity / cal.delta)));
        maturity_years = *price.maturity;
    }
    const RateLattice lattice{cal, n_steps};

    double value = 0.0;
    PricingDiagnostics diag;
    if (price.ptilde) {
        value = price_zcb_const(lattice, *price.ptilde, n_steps);
    } else {
        if (!(price.mu && price.sigma && price.p_up))
            throw Error(ErrorCode::bad_argument,
                        "price needs --mu, --sigma, and --p-up (or a direct --ptilde)");
        PricingPolicy policy;
        if (price.ptilde_policy == "clamp")
            policy.out_of_range = PricingPolicy::OutOfRange::clamp;
        else if (price.ptilde_policy != "error")
            throw Error(ErrorCode::bad_argument,
                        "--ptilde-policy must be 'error' or 'clamp', got '" +
                            price.ptilde_policy + "'");
        policy.theta_rate = parse_theta_rate(price.theta_rate, true);
        const EquityParams equity{*price.mu, *price.sigma, *price.p_up};
        value = price_zcb(lattice, equity, n_steps, policy, &diag);
    }

    Report report;
    report.single = true;
    report.header = {"maturity_years", "n_steps", "price", "clamped_nodes"};
    report.rows.push_back({Cell::num(maturity_years),
                           Cell::count(static_cast<long long>(n_steps)), Cell::num(value),
                           Cell::count(static_cast<long long>(diag.clamped_nodes))});
    deliver(report, io.format, io.out);
}

struct ImplyOpts {
    CurveOpts curve;
    double mu = 0.0;
    double sigma = 0.0;
    double p_up = 0.0;
    std::string grid;
    double tol = 1e-12;
    std::string theta_rate;  // empty -> fixed at the lattice anchor rate
};

void run_imply(const LatticeOpts& lattice_opts, const ImplyOpts& imply, const IoOpts& io,
               const std::string& plot_script) {
    const BdtCalibration cal = build_calibration(lattice_opts, Anchor::last_observation);
    const YieldCurve curve = load_curve(imply.curve);
    const std::vector<double> grid = parse_grid(imply.grid);

    double rate_for_theta = cal.r0;
    if (!imply.theta_rate.empty()) {
        const auto fixed = parse_theta_rate(imply.theta_rate, false);
        rate_for_theta = *fixed;
    }

    const EquityParams baseline{imply.mu, imply.sigma, imply.p_up};
    const auto points =
        build_implied_curves(curve, cal, baseline, rate_for_theta, grid, imply.tol);

    Report report;
    report.header = {"maturity_years", "n_steps",       "market_price",
                     "ptilde",         "implied_mu",    "implied_sigma",
                     "implied_p",      "residual",      "flags"};
    for (const auto& point : points) {
        std::vector<Cell> row(report.header.size());
        row[0] = Cell::num(point.maturity_years);
        row[1] = Cell::count(static_cast<long long>(point.n_steps));
        if (!point.error) {
            row[2] = Cell::num(point.market_price);
            row[3] = Cell::num(point.ptilde);
            row[7] = Cell::num(point.solve.residual);
        } else {
            std::cerr << "warning: maturity " << csv::format_double(point.maturity_years)
                      << ": " << *point.error << "\n";
        }
        if (point.mu) row[4] = Cell::num(*point.mu);
        if (point.sigma) row[5] = Cell::num(*point.sigma);
        if (point.p) row[6] = Cell::num(*point.p);
        row[8] = Cell::str(point.flags);
        report.rows.push_back(std::move(row));
    }
    deliver(report, io.format, io.out);
    if (!plot_script.empty()) emit_implied_plot_script(plot_script, io.out);
}

struct SimulateOpts {
    std::size_t steps = 0;
    std::optional<double> p_up;
    std::uint64_t seed = 0;
};

void run_simulate(const LatticeOpts& lattice_opts, const SimulateOpts& sim, const IoOpts& io,
                  const std::string& plot_script) {
    const BdtCalibration cal = build_calibration(lattice_opts, Anchor::last_observation);
    if (sim.steps < 1)
        throw Error(ErrorCode::bad_argument, "simulate needs --steps >= 1");
    // estimated up-move frequency when the lattice came from data, even odds
    // otherwise
    const double p_up = sim.p_up ? *sim.p_up
                                 : (lattice_opts.series.input.empty() ? 0.5
                                                                      : cal.rate_moments.p_up);
    const auto path = simulate_path(cal, sim.steps, p_up, sim.seed);

    Report report;
    report.header = {"date_or_step", "market", "model"};
    for (std::size_t i = 0; i < path.size(); ++i)
        report.rows.push_back({Cell::count(static_cast<long long>(i)), Cell::none(),
                               Cell::num(path[i])});
    deliver(report, io.format, io.out);
    if (!plot_script.empty()) emit_pair_plot_script(plot_script, io.out);
}

// ---------------------------------------------------------------------------
// wiring

void add_io_flags(CLI::App* cmd, IoOpts& io) {
    cmd->add_option("--format", io.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", io.out, "Output file (default: stdout)");
}

void add_series_flags(CLI::App* cmd, SeriesOpts& series, bool required,
                      const std::string& default_kind) {
    series.kind = default_kind;
    auto* input = cmd->add_option("--input", series.input, "Historical series CSV");
    if (required) input->required();
    cmd->add_option("--kind", series.kind, "Series kind (validation rules)")
        ->check(CLI::IsMember({"rate", "price", "yield"}))
        ->capture_default_str();
    cmd->add_option("--date-col", series.date_col, "Date column (default: detected)");
    cmd->add_option("--value-col", series.value_col, "Value column (default: detected)");
    cmd->add_option("--date-format", series.date_format, "strptime-style date format")
        ->capture_default_str();
    cmd->add_flag("--percent", series.percent, "Input values are percentages; divide by 100");
    cmd->add_option("--delta", series.delta, "Step size in years")->capture_default_str();
}

void add_lattice_flags(CLI::App* cmd, LatticeOpts& lattice, bool input_required,
                       const std::string& default_kind) {
    add_series_flags(cmd, lattice.series, input_required, default_kind);
    cmd->add_option("--r0", lattice.r0,
                    "Anchor rate (default: taken from the input series)");
    cmd->add_option("--c1", lattice.c1, "Drift coefficient override");
    cmd->add_option("--c2", lattice.c2, "Spread coefficient override");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bondlens: short-rate lattice calibration, bond pricing, and "
                 "implied equity parameters"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bondlens 0.1.0");
    app.set_config("--config", "", "Read options from an INI file (CLI flags win)");

    // estimate
    SeriesOpts est_series;
    IoOpts est_io;
    auto* estimate = app.add_subcommand(
        "estimate", "Estimate per-step return moments from a historical series");
    add_series_flags(estimate, est_series, true, "price");
    add_io_flags(estimate, est_io);

    // calibrate
    LatticeOpts calib_lattice;
    IoOpts calib_io;
    auto* calibrate =
        app.add_subcommand("calibrate", "Calibrate lattice coefficients from a rate series");
    add_series_flags(calibrate, calib_lattice.series, true, "rate");
    calibrate->add_option("--r0", calib_lattice.r0,
                          "Anchor rate (default: last observation)");
    add_io_flags(calibrate, calib_io);

    // fit
    LatticeOpts fit_lattice;
    IoOpts fit_io;
    std::string fit_plot;
    auto* fit = app.add_subcommand(
        "fit", "Track a historical series on the calibrated lattice (market vs model)");
    add_lattice_flags(fit, fit_lattice, true, "rate");
    fit->get_option("--r0")->description("Anchor rate (default: first observation)");
    fit->add_option("--plot-script", fit_plot, "Also write a companion plotting script");
    add_io_flags(fit, fit_io);

    // price
    LatticeOpts price_lattice;
    PriceOpts price_opts;
    IoOpts price_io;
    auto* price = app.add_subcommand("price", "Price a zero-coupon bond on the lattice");
    add_lattice_flags(price, price_lattice, false, "rate");
    price->add_option("--maturity", price_opts.maturity, "Maturity in years");
    price->add_option("--steps", price_opts.steps, "Maturity in lattice steps");
    price->add_option("--mu", price_opts.mu, "Asset drift for the tilt");
    price->add_option("--sigma", price_opts.sigma, "Asset volatility for the tilt");
    price->add_option("--p-up", price_opts.p_up, "Natural up probability for the tilt");
    auto* ptilde_opt = price->add_option("--ptilde", price_opts.ptilde,
                                         "Constant risk-neutral probability (skips the tilt)");
    ptilde_opt->excludes("--mu")->excludes("--sigma")->excludes("--p-up");
    price->add_option("--theta-rate", price_opts.theta_rate,
                      "Rate inside theta: node | fixed:<rate>")
        ->capture_default_str();
    price->add_option("--ptilde-policy", price_opts.ptilde_policy,
                      "Out-of-range tilt handling: error | clamp")
        ->capture_default_str();
    add_io_flags(price, price_io);

    // imply
    LatticeOpts imply_lattice;
    ImplyOpts imply_opts;
    IoOpts imply_io;
    std::string imply_plot;
    auto* imply = app.add_subcommand(
        "imply", "Invert market bond prices into implied equity parameter curves");
    add_lattice_flags(imply, imply_lattice, false, "rate");
    imply->add_option("--yield-curve", imply_opts.curve.path, "Yield curve CSV")->required();
    imply->add_option("--maturity-col", imply_opts.curve.maturity_col,
                      "Curve maturity column (default: detected)");
    imply->add_option("--yield-col", imply_opts.curve.yield_col,
                      "Curve yield column (default: detected)");
    imply->add_flag("--curve-percent", imply_opts.curve.percent,
                    "Curve yields are percentages; divide by 100");
    imply->add_option("--mu", imply_opts.mu, "Baseline asset drift")->required();
    imply->add_option("--sigma", imply_opts.sigma, "Baseline asset volatility")->required();
    imply->add_option("--p-up", imply_opts.p_up, "Baseline natural up probability")
        ->required();
    imply->add_option("--grid", imply_opts.grid,
                      "Maturity grid: start:stop:step or comma-separated years")
        ->required();
    imply->add_option("--tol", imply_opts.tol, "Bisection price tolerance")
        ->capture_default_str();
    imply->add_option("--theta-rate", imply_opts.theta_rate,
                      "fixed:<rate> used inside theta (default: the lattice anchor rate)");
    imply->add_option("--plot-script", imply_plot, "Also write a companion plotting script");
    add_io_flags(imply, imply_io);

    // simulate
    LatticeOpts sim_lattice;
    SimulateOpts sim_opts;
    IoOpts sim_io;
    std::string sim_plot;
    auto* simulate =
        app.add_subcommand("simulate", "Simulate a seeded random path over the lattice");
    add_lattice_flags(simulate, sim_lattice, false, "rate");
    simulate->add_option("--steps", sim_opts.steps, "Number of steps")->required();
    simulate->add_option("--p-up", sim_opts.p_up,
                         "Up-move chance (default: estimated from the input, else 0.5)");
    simulate->add_option("--seed", sim_opts.seed, "Random seed")->capture_default_str();
    simulate->add_option("--plot-script", sim_plot, "Also write a companion plotting script");
    add_io_flags(simulate, sim_io);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorCode::bad_argument);
    }

    try {
        if (*estimate) run_estimate(est_series, est_io);
        if (*calibrate) run_calibrate(calib_lattice, calib_io);
        if (*fit) run_fit(fit_lattice, fit_io, fit_plot);
        if (*price) run_price(price_lattice, price_opts, price_io);
        if (*imply) run_imply(imply_lattice, imply_opts, imply_io, imply_plot);
        if (*simulate) run_simulate(sim_lattice, sim_opts, sim_io, sim_plot);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
