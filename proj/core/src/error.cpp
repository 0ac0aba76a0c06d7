#include "gripkit/error.hpp"

#include <cmath>

namespace gripkit {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::InvalidArgument: return "invalid_argument";
    case ErrorCategory::NonFinite: return "non_finite";
    case ErrorCategory::SingularDesign: return "singular_design";
    case ErrorCategory::CalibrationInvalid: return "calibration_invalid";
    case ErrorCategory::NotHomed: return "not_homed";
    case ErrorCategory::HomingFailed: return "homing_failed";
    case ErrorCategory::OutOfRange: return "out_of_range";
    case ErrorCategory::LengthMismatch: return "length_mismatch";
    case ErrorCategory::MissingMarkers: return "missing_markers";
    case ErrorCategory::WindowTooShort: return "window_too_short";
    case ErrorCategory::IncompleteTable: return "incomplete_table";
    case ErrorCategory::Parse: return "parse_error";
    case ErrorCategory::Io: return "io_error";
    case ErrorCategory::NoSessions: return "no_sessions";
    case ErrorCategory::Unsupported: return "unsupported";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Parse: return 3;
    case ErrorCategory::Io: return 4;
    case ErrorCategory::NoSessions: return 5;
    case ErrorCategory::HomingFailed:
    case ErrorCategory::NotHomed: return 6;
    case ErrorCategory::CalibrationInvalid:
    case ErrorCategory::SingularDesign: return 7;
    case ErrorCategory::Unsupported: return 8;
    default: return 2;
  }
}

ParseError::ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what)
    : Error(ErrorCategory::Parse,
            source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      source_(std::move(source)),
      line_(line),
      column_(column) {}

void require_finite(double value, std::string_view what) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCategory::NonFinite, std::string(what) + " is not finite");
  }
}

}  // namespace gripkit
