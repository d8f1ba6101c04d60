#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bondlens {

// Calendar date. Parsing, formatting, and ordering only; no arithmetic.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    auto operator<=>(const Date&) const = default;
    std::string iso() const;

    // strptime-style format, ISO-8601 by default
    static Date parse(const std::string& text, const std::string& format = "%Y-%m-%d");
};

enum class SeriesKind { rate, price, yield };

struct Observation {
    Date date;
    double value = 0.0;
};

// Dated observations, strictly increasing by date. Values must be strictly
// positive for rate and price series and finite for yield series.
struct ObservationSeries {
    SeriesKind kind = SeriesKind::rate;
    std::vector<Observation> entries;
};

// Column selection and unit handling for series CSVs. Empty column names
// enable detection: the date column matches "date" case-insensitively (else
// the first column); the value column prefers "Adj Close", then "Close",
// then the first column that is not the date column.
struct SeriesSchema {
    std::string date_column;
    std::string value_column;
    std::string date_format = "%Y-%m-%d";
    bool percent = false;  // divide parsed values by 100
};

struct ParsedSeries {
    ObservationSeries series;
    std::size_t skipped_rows = 0;  // rows with an empty or non-numeric value
    std::string date_column_used;
    std::string value_column_used;
};

ParsedSeries parse_series(std::istream& in, SeriesKind kind, const SeriesSchema& schema = {});

// Writes header "date,value" with ISO dates and round-trip-exact values, so
// re-parsing reproduces the series identically.
void write_series_csv(std::ostream& out, const ObservationSeries& series);

struct CurvePoint {
    double maturity_years = 0.0;
    double yield = 0.0;  // annualized, continuously compounded, decimal
};

// Zero-coupon yield curve quoted by time to maturity.
struct YieldCurve {
    std::vector<CurvePoint> points;
    std::optional<Date> as_of;
};

struct CurveSchema {
    std::string maturity_column;  // empty -> "maturity"/"maturity_years"/first
    std::string yield_column;     // empty -> "yield"/first non-maturity column
    bool percent = false;         // divide parsed yields by 100
};

YieldCurve parse_yield_curve(std::istream& in, const CurveSchema& schema = {});

// Linear interpolation in maturity. Quoted maturities are answered exactly;
// maturities outside the quoted range are refused, never extrapolated.
double yield_at(const YieldCurve& curve, double maturity_years);

}  // namespace bondlens
