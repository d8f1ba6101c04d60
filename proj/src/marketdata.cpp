#include "bondlens/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "bondlens/csv.hpp"
#include "bondlens/errors.hpp"

namespace bondlens {

namespace {

// Strict numeric field: optional surrounding blanks, then a full from_chars
// match yielding a finite value. Anything else counts as non-numeric.
bool parse_value(const std::string& text, double& out) {
    const char* b = text.data();
    const char* e = b + text.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
    if (b == e) return false;
    const auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

std::size_t require_column(const csv::Table& table, const std::string& name,
                           const char* role) {
    if (const auto idx = table.column(name)) return *idx;
    throw Error(ErrorCode::parse,
                std::string(role) + " column '" + name + "' not found in CSV header");
}

}  // namespace

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(const std::string& text, const std::string& format) {
    std::tm tm = {};
    std::istringstream in(text);
    in >> std::get_time(&tm, format.c_str());
    if (in.fail())
        throw Error(ErrorCode::parse,
                    "unparseable date '" + text + "' for format '" + format + "'");
    in.peek();
    if (!in.eof())
        throw Error(ErrorCode::parse,
                    "trailing text in date '" + text + "' for format '" + format + "'");
    const Date date{tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday};
    if (date.month < 1 || date.month > 12 || date.day < 1 || date.day > 31)
        throw Error(ErrorCode::parse, "date '" + text + "' is out of calendar range");
    return date;
}

ParsedSeries parse_series(std::istream& in, SeriesKind kind, const SeriesSchema& schema) {
    const csv::Table table = csv::read(in);

    std::size_t date_idx;
    if (!schema.date_column.empty()) {
        date_idx = require_column(table, schema.date_column, "date");
    } else if (const auto idx = table.column_ci("date")) {
        date_idx = *idx;
    } else {
        date_idx = 0;
    }

    std::size_t value_idx;
    if (!schema.value_column.empty()) {
        value_idx = require_column(table, schema.value_column, "value");
    } else if (const auto adj = table.column_ci("adj close")) {
        value_idx = *adj;
    } else if (const auto close = table.column_ci("close")) {
        value_idx = *close;
    } else {
        std::size_t fallback = table.header.size();
        for (std::size_t i = 0; i < table.header.size(); ++i)
            if (i != date_idx) {
                fallback = i;
                break;
            }
        if (fallback == table.header.size())
            throw Error(ErrorCode::parse, "no value column available in CSV header");
        value_idx = fallback;
    }

    ParsedSeries out;
    out.series.kind = kind;
    out.date_column_used = table.header[date_idx];
    out.value_column_used = table.header[value_idx];

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        double value;
        if (!parse_value(row[value_idx], value)) {
            ++out.skipped_rows;
            continue;
        }
        if (schema.percent) value /= 100.0;
        const Date date = Date::parse(row[date_idx], schema.date_format);
        if ((kind == SeriesKind::rate || kind == SeriesKind::price) && !(value > 0.0))
            throw Error(ErrorCode::sanity_range,
                        "non-positive value " + csv::format_double(value) + " on " +
                            date.iso() + " in a " +
                            (kind == SeriesKind::rate ? std::string("rate") : std::string("price")) +
                            " series");
        if (!out.series.entries.empty() && !(out.series.entries.back().date < date))
            throw Error(ErrorCode::ordering,
                        "dates not strictly increasing at " + date.iso() +
                            " (CSV line " + std::to_string(table.row_lines[r]) + ")");
        out.series.entries.push_back({date, value});
    }

    if (out.series.entries.size() < 2)
        throw Error(ErrorCode::insufficient_data,
                    "need at least 2 valid rows, got " +
                        std::to_string(out.series.entries.size()) + " (" +
                        std::to_string(out.skipped_rows) + " skipped)");
    return out;
}

void write_series_csv(std::ostream& out, const ObservationSeries& series) {
    csv::write_row(out, {"date", "value"});
    for (const auto& obs : series.entries)
        csv::write_row(out, {obs.date.iso(), csv::format_double(obs.value)});
}

YieldCurve parse_yield_curve(std::istream& in, const CurveSchema& schema) {
    const csv::Table table = csv::read(in);

    std::size_t mat_idx;
    if (!schema.maturity_column.empty()) {
        mat_idx = require_column(table, schema.maturity_column, "maturity");
    } else if (const auto idx = table.column_ci("maturity_years")) {
        mat_idx = *idx;
    } else if (const auto idx2 = table.column_ci("maturity")) {
        mat_idx = *idx2;
    } else {
        mat_idx = 0;
    }

    std::size_t yield_idx;
    if (!schema.yield_column.empty()) {
        yield_idx = require_column(table, schema.yield_column, "yield");
    } else if (const auto idx = table.column_ci("yield")) {
        yield_idx = *idx;
    } else {
        std::size_t fallback = table.header.size();
        for (std::size_t i = 0; i < table.header.size(); ++i)
            if (i != mat_idx) {
                fallback = i;
                break;
            }
        if (fallback == table.header.size())
            throw Error(ErrorCode::parse, "no yield column available in CSV header");
        yield_idx = fallback;
    }

    YieldCurve curve;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = table.row_lines[r];
        double maturity, yield;
        if (!parse_value(row[mat_idx], maturity))
            throw Error(ErrorCode::parse, "CSV line " + std::to_string(line) +
                                              ": malformed maturity '" + row[mat_idx] + "'");
        if (!parse_value(row[yield_idx], yield))
            throw Error(ErrorCode::parse, "CSV line " + std::to_string(line) +
                                              ": malformed yield '" + row[yield_idx] + "'");
        if (schema.percent) yield /= 100.0;
        if (!(maturity > 0.0))
            throw Error(ErrorCode::sanity_range,
                        "maturity must be positive, got " + csv::format_double(maturity));
        if (yield < -0.5 || yield > 1.0)
            throw Error(ErrorCode::sanity_range,
                        "yield " + csv::format_double(yield) +
                            " outside sanity range [-0.5, 1.0] at maturity " +
                            csv::format_double(maturity));
        if (!curve.points.empty() && !(curve.points.back().maturity_years < maturity))
            throw Error(ErrorCode::ordering,
                        "maturities not strictly increasing at " + csv::format_double(maturity));
        curve.points.push_back({maturity, yield});
    }

    if (curve.points.empty())
        throw Error(ErrorCode::insufficient_data, "yield curve has no valid rows");
    return curve;
}

double yield_at(const YieldCurve& curve, double maturity_years) {
    if (curve.points.empty())
        throw Error(ErrorCode::insufficient_data, "yield curve is empty");
    if (!std::isfinite(maturity_years))
        throw Error(ErrorCode::bad_argument, "maturity must be finite");
    const double lo = curve.points.front().maturity_years;
    const double hi = curve.points.back().maturity_years;
    if (maturity_years < lo || maturity_years > hi)
        throw Error(ErrorCode::extrapolation,
                    "maturity " + csv::format_double(maturity_years) +
                        " outside quoted range [" + csv::format_double(lo) + ", " +
                        csv::format_double(hi) + "]");

    const auto it = std::lower_bound(
        curve.points.begin(), curve.points.end(), maturity_years,
        [](const CurvePoint& pt, double m) { return pt.maturity_years < m; });
    if (it->maturity_years == maturity_years) return it->yield;

    const auto& right = *it;
    const auto& left = *(it - 1);
    const double w = (maturity_years - left.maturity_years) /
                     (right.maturity_years - left.maturity_years);
    return left.yield + w * (right.yield - left.yield);
}

}  // namespace bondlens
