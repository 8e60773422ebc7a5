#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace aavr::csv {

/// Comma-separated fields of one line.  Double-quoted fields may contain
/// commas and doubled quotes.
std::vector<std::string> split_line(std::string_view line);

/// Throw InputError when the text is not a complete number.
double to_double(std::string_view text);
long long to_integer(std::string_view text);

/// Shortest text that reads back to the same double.
std::string format(double value);

/// Header-first reader.  Blank lines are skipped.
class Reader {
public:
    Reader(std::istream& in, std::string source);

    const std::vector<std::string>& header() const { return header_; }
    /// Index of a header column; throws ScenarioError naming the source.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;

    bool next(std::vector<std::string>& fields);
    std::size_t line_number() const { return line_; }
    const std::string& source() const { return source_; }

private:
    std::istream& in_;
    std::string source_;
    std::vector<std::string> header_;
    std::size_t line_ = 0;
};

/// Writes rows; fields containing commas or quotes are quoted.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

}  // namespace aavr::csv
