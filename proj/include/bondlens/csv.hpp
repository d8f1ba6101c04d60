#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bondlens::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  // 1-based source line of each row

    std::optional<std::size_t> column(const std::string& name) const;
    std::optional<std::size_t> column_ci(const std::string& name) const;
};

// RFC 4180 reader: quoted fields, embedded commas/quotes/newlines, CRLF
// line ends, UTF-8 BOM tolerated. The first record is the header. Ragged or
// malformed records raise ErrorCode::parse with the offending line number.
Table read(std::istream& in);

// Quotes a field only when it contains a comma, quote, or newline.
std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal text that parses back to the exact same double.
std::string format_double(double x);

}  // namespace bondlens::csv
