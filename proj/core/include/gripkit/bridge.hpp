#pragma once

// Line protocol spoken by the motor-controller firmware over a serial port:
//
//   SET <axis> <counts>      -> OK
//   GET <axis>               -> POS <axis> <counts> CUR <mA>
//   HOME <axis>              -> OK | ERR <category>
//
// Axis is X or Y; every line is terminated by '\n'.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>

#include "gripkit/actuator.hpp"

namespace gripkit::bridge {

struct SetCommand {
  Axis axis;
  std::int64_t counts;
};
struct GetCommand {
  Axis axis;
};
struct HomeCommand {
  Axis axis;
};
using Command = std::variant<SetCommand, GetCommand, HomeCommand>;

struct PositionReport {
  Axis axis;
  std::int64_t counts;
  std::int64_t current_ma;
};

std::string format(const Command& cmd);
std::string format(const PositionReport& pos);
Command parse_command(std::string_view line);
PositionReport parse_position(std::string_view line);

/// Firmware stand-in backed by the simulated actuator; advances the
/// simulation by one control tick per handled line.
class SimulatedController {
 public:
  explicit SimulatedController(ActuatorSpec spec, double start_offset_mm = 0.0);

  std::string handle(std::string_view line);
  const ActuatorState& state(Axis axis) const { return axis == Axis::X ? x_ : y_; }

 private:
  ActuatorSpec spec_;
  ActuatorState x_;
  ActuatorState y_;
};

/// Host side of the protocol over a bidirectional stream (a serial device
/// opened as a file, or a socket).
class Client {
 public:
  Client(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  void set(Axis axis, std::int64_t counts);
  PositionReport get(Axis axis);
  void home(Axis axis);

 private:
  std::string transact(const Command& cmd);

  std::istream& in_;
  std::ostream& out_;
};

}  // namespace gripkit::bridge
