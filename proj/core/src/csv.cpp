#include "gripkit/csv.hpp"

#include <charconv>
#include <istream>

#include "gripkit/error.hpp"

namespace gripkit {

CsvReader::CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

void CsvReader::expect_header(std::initializer_list<std::string_view> names) {
  auto row = next_row();
  if (!row) throw ParseError(source_, line_ + 1, 0, "missing header row");
  if (row->size() != names.size()) {
    throw ParseError(source_, line_, 0,
                     "expected " + std::to_string(names.size()) + " header columns, found " +
                         std::to_string(row->size()));
  }
  std::size_t i = 0;
  for (auto name : names) {
    const auto& f = (*row)[i++];
    if (f.text != name) {
      throw ParseError(source_, line_, f.column,
                       "expected column '" + std::string(name) + "', found '" + f.text + "'");
    }
  }
}

std::optional<CsvReader::Row> CsvReader::next_row() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty() || text.front() == '#') continue;
    Row row;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      const auto end = comma == std::string::npos ? text.size() : comma;
      std::size_t b = start, e = end;
      while (b < e && text[b] == ' ') ++b;
      while (e > b && text[e - 1] == ' ') --e;
      row.push_back({text.substr(b, e - b), b + 1});
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return row;
  }
  return std::nullopt;
}

double CsvReader::parse_double(const Row& row, std::size_t index) const {
  if (index >= row.size()) throw ParseError(source_, line_, 0, "missing column " + std::to_string(index + 1));
  const auto& f = row[index];
  double value = 0.0;
  const char* first = f.text.data();
  const char* last = first + f.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || f.text.empty()) {
    throw ParseError(source_, line_, f.column, "not a number: '" + f.text + "'");
  }
  return value;
}

long CsvReader::parse_int(const Row& row, std::size_t index) const {
  if (index >= row.size()) throw ParseError(source_, line_, 0, "missing column " + std::to_string(index + 1));
  const auto& f = row[index];
  long value = 0;
  const char* first = f.text.data();
  const char* last = first + f.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || f.text.empty()) {
    throw ParseError(source_, line_, f.column, "not an integer: '" + f.text + "'");
  }
  return value;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  if (value == 0.0) value = 0.0;  // fold -0.0
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, decimals);
  if (ec != std::errc()) return "nan";
  std::string out(buf, ptr);
  if (out.find_first_not_of("-0.") == std::string::npos && out.front() == '-') out.erase(0, 1);
  return out;
}

std::string format_roundtrip(double value) {
  char buf[64];
  if (value == 0.0) value = 0.0;
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

}  // namespace gripkit
