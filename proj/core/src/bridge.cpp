#include "gripkit/bridge.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

#include "gripkit/error.hpp"

namespace gripkit::bridge {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\r' || line[i] == '\n')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\r' && line[i] != '\n') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void bad(std::string_view line, const std::string& why) {
  throw ParseError("bridge", 1, 0, why + ": '" + std::string(line) + "'");
}

Axis parse_axis(std::string_view tok, std::string_view line) {
  if (tok == "X") return Axis::X;
  if (tok == "Y") return Axis::Y;
  bad(line, "unknown axis");
}

std::int64_t parse_i64(std::string_view tok, std::string_view line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) bad(line, "not an integer");
  return v;
}

}  // namespace

std::string format(const Command& cmd) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SetCommand>) {
          return std::string("SET ") + axis_name(c.axis) + " " + std::to_string(c.counts);
        } else if constexpr (std::is_same_v<T, GetCommand>) {
          return std::string("GET ") + axis_name(c.axis);
        } else {
          return std::string("HOME ") + axis_name(c.axis);
        }
      },
      cmd);
}

std::string format(const PositionReport& pos) {
  return std::string("POS ") + axis_name(pos.axis) + " " + std::to_string(pos.counts) + " CUR " +
         std::to_string(pos.current_ma);
}

Command parse_command(std::string_view line) {
  const auto tok = split(line);
  if (tok.empty()) bad(line, "empty command");
  if (tok[0] == "SET" && tok.size() == 3) return SetCommand{parse_axis(tok[1], line), parse_i64(tok[2], line)};
  if (tok[0] == "GET" && tok.size() == 2) return GetCommand{parse_axis(tok[1], line)};
  if (tok[0] == "HOME" && tok.size() == 2) return HomeCommand{parse_axis(tok[1], line)};
  bad(line, "unknown command");
}

PositionReport parse_position(std::string_view line) {
  const auto tok = split(line);
  if (tok.size() != 5 || tok[0] != "POS" || tok[3] != "CUR") bad(line, "malformed position report");
  return {parse_axis(tok[1], line), parse_i64(tok[2], line), parse_i64(tok[4], line)};
}

SimulatedController::SimulatedController(ActuatorSpec spec, double start_offset_mm)
    : spec_(spec),
      x_(make_unhomed(Axis::X, start_offset_mm, spec)),
      y_(make_unhomed(Axis::Y, -start_offset_mm, spec)) {}

std::string SimulatedController::handle(std::string_view line) {
  Command cmd;
  try {
    cmd = parse_command(line);
  } catch (const Error&) {
    return "ERR parse_error";
  }
  return std::visit(
      [this](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        ActuatorState& s = c.axis == Axis::X ? x_ : y_;
        if constexpr (std::is_same_v<T, SetCommand>) {
          if (!s.homed) return "ERR not_homed";
          s.target_counts = static_cast<double>(c.counts);
          s = control_step(s, spec_);
          return "OK";
        } else if constexpr (std::is_same_v<T, GetCommand>) {
          if (s.homed) s = control_step(s, spec_);
          return format(PositionReport{c.axis, s.encoder_counts(), std::llround(s.current_a * 1000.0)});
        } else {
          try {
            s = home(s, spec_);
          } catch (const Error& e) {
            return "ERR " + std::string(category_name(e.category()));
          }
          return "OK";
        }
      },
      cmd);
}

std::string Client::transact(const Command& cmd) {
  out_ << format(cmd) << '\n';
  out_.flush();
  std::string reply;
  if (!std::getline(in_, reply)) throw Error(ErrorCategory::Io, "bridge closed while waiting for reply");
  if (!reply.empty() && reply.back() == '\r') reply.pop_back();
  if (reply.rfind("ERR", 0) == 0) {
    const std::string what = reply.size() > 4 ? reply.substr(4) : "error";
    throw Error(what == "homing_failed" ? ErrorCategory::HomingFailed : ErrorCategory::Io,
                "controller replied " + reply);
  }
  return reply;
}

void Client::set(Axis axis, std::int64_t counts) { transact(SetCommand{axis, counts}); }

PositionReport Client::get(Axis axis) { return parse_position(transact(GetCommand{axis})); }

void Client::home(Axis axis) { transact(HomeCommand{axis}); }

}  // namespace gripkit::bridge
