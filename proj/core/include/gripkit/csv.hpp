#pragma once

#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gripkit {

/// Minimal reader for the comma-separated files this project writes: no
/// quoting, '#' comment lines, blank lines skipped. Errors carry line and
/// column.
class CsvReader {
 public:
  struct Field {
    std::string text;
    std::size_t column;   ///< 1-based character offset in the line
  };
  using Row = std::vector<Field>;

  CsvReader(std::istream& in, std::string source);

  /// Reads the header row and checks it against `names` exactly.
  void expect_header(std::initializer_list<std::string_view> names);

  std::optional<Row> next_row();

  double parse_double(const Row& row, std::size_t index) const;
  long parse_int(const Row& row, std::size_t index) const;
  std::size_t column_of(const Row& row, std::size_t index) const { return row.at(index).column; }
  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

/// printf-style fixed formatting; locale independent and identical on
/// every run, which the byte-for-byte reproducibility of recordings needs.
std::string format_fixed(double value, int decimals);

}  // namespace gripkit

namespace gripkit {

/// Shortest text that parses back to exactly `value`.
std::string format_roundtrip(double value);

}  // namespace gripkit
