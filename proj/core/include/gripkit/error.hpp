#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gripkit {

/// Machine-readable failure class. The CLI prints the category name and
/// maps it to a process exit code.
enum class ErrorCategory {
  InvalidArgument,
  NonFinite,
  SingularDesign,
  CalibrationInvalid,
  NotHomed,
  HomingFailed,
  OutOfRange,
  LengthMismatch,
  MissingMarkers,
  WindowTooShort,
  IncompleteTable,
  Parse,
  Io,
  NoSessions,
  Unsupported,
};

std::string_view category_name(ErrorCategory c) noexcept;
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Malformed input file. Line and column are 1-based; column 0 means the
/// whole line.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string source_;
  std::size_t line_;
  std::size_t column_;
};

void require_finite(double value, std::string_view what);

}  // namespace gripkit
