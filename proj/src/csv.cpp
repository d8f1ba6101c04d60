#include "bondlens/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>

#include "bondlens/errors.hpp"

namespace bondlens::csv {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::parse, "CSV line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::optional<std::size_t> Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

std::optional<std::size_t> Table::column_ci(const std::string& name) const {
    const std::string want = lower(name);
    for (std::size_t i = 0; i < header.size(); ++i)
        if (lower(header[i]) == want) return i;
    return std::nullopt;
}

Table read(std::istream& in) {
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    if (data.rfind("\xEF\xBB\xBF", 0) == 0) pos = 3;

    Table table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        if (table.header.empty()) {
            table.header = record;
        } else {
            if (record.size() != table.header.size())
                fail(record_line, "expected " + std::to_string(table.header.size()) +
                                      " fields, got " + std::to_string(record.size()));
            table.rows.push_back(record);
            table.row_lines.push_back(record_line);
        }
        record.clear();
        record_line = line;
    };

    while (pos < data.size()) {
        const char c = data[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < data.size() && data[pos + 1] == '"') {
                    field += '"';
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
        } else if (c == '"') {
            if (!field.empty() || field_was_quoted) fail(line, "unexpected quote inside field");
            in_quotes = true;
            field_was_quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && pos + 1 < data.size() && data[pos + 1] == '\n') ++pos;
            ++line;
            end_record();
        } else {
            if (field_was_quoted) fail(line, "text after closing quote");
            field += c;
        }
        ++pos;
    }
    if (in_quotes) fail(record_line, "unterminated quoted field");
    if (!field.empty() || field_was_quoted || !record.empty()) end_record();

    if (table.header.empty()) throw Error(ErrorCode::parse, "CSV input is empty");
    return table;
}

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace bondlens::csv
