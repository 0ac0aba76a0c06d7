#pragma once

#include <cstdint>
#include <vector>

namespace gripkit {

enum class Axis { X, Y };

const char* axis_name(Axis axis) noexcept;

/// Leadscrew drive of one tactor axis: micro DC motor, 1:51.45 gearbox,
/// 0.7 mm pitch screw, magnetic encoder on the output.
struct ActuatorSpec {
  double gear_ratio = 51.45;
  double pitch_mm = 0.7;                   ///< per output revolution
  double counts_per_output_rev = 617.0;
  double max_torque_nmm = 84.37;
  double nominal_speed_rpm = 590.0;        ///< output shaft
  double travel_range_mm = 1.5;            ///< software limit, symmetric about zero
  double thrust_limit_n = 181.8;
  double settle_band_counts = 60.0;
  double duty_max = 1.0;

  /// Mechanical end stops sit this far beyond the software limit.
  double end_stop_margin_mm = 0.5;
  // Simulated driver current: baseline + per-duty load + stall spike.
  double current_baseline_a = 0.10;
  double current_per_duty_a = 0.35;
  double current_stall_a = 1.20;

  double mm_per_count() const noexcept { return pitch_mm / counts_per_output_rev; }
  double mm_per_motor_rev() const noexcept { return pitch_mm / gear_ratio; }
  double speed_mm_per_s() const noexcept { return nominal_speed_rpm / 60.0 * pitch_mm; }
  double speed_counts_per_s() const noexcept { return speed_mm_per_s() / mm_per_count(); }
  double travel_counts() const noexcept { return travel_range_mm / mm_per_count(); }
  /// Distance from either end stop to the centre, in counts.
  double half_stroke_counts() const noexcept {
    return (travel_range_mm + end_stop_margin_mm) / mm_per_count();
  }
};

/// State of one axis. Position is kept as a real number of counts because
/// the simulated link moves continuously; `encoder_counts()` is what a
/// real encoder would report.
struct ActuatorState {
  Axis axis = Axis::X;
  double position_counts = 0.0;
  double target_counts = 0.0;
  double duty = 0.0;
  double current_a = 0.0;
  bool homed = false;
  bool at_limit = false;
  // Mechanical end stops in the current encoder frame. Before homing the
  // frame origin is wherever the encoder powered up.
  double stop_low_counts = 0.0;
  double stop_high_counts = 0.0;

  std::int64_t encoder_counts() const noexcept;
  bool settled(const ActuatorSpec& spec) const noexcept;
};

double counts_to_mm(double counts, const ActuatorSpec& spec) noexcept;
std::int64_t mm_to_counts(double mm, const ActuatorSpec& spec) noexcept;

/// A freshly powered axis whose link sits `offset_mm` away from the
/// physical centre of its stroke (positive toward the high stop).
ActuatorState make_unhomed(Axis axis, double offset_mm, const ActuatorSpec& spec);

/// One 100 Hz tick of bang-off-bang duty control with a deadband equal to
/// the settle band. The link moves at nominal speed while driven.
ActuatorState control_step(const ActuatorState& state, const ActuatorSpec& spec, double dt_s = 0.01);

struct HomingOptions {
  double current_threshold_a = 1.0;
  double dt_s = 0.01;
};

/// Drives to the low stop until the current spike, then re-zeroes the
/// encoder at the centre of the stroke and moves there.
ActuatorState home(const ActuatorState& state, const ActuatorSpec& spec, const HomingOptions& options = {});

struct TrajectoryPoint {
  double t_s = 0.0;
  double target_counts = 0.0;
};

/// Out-and-back stimulus: 0 -> +displacement -> 0 at nominal speed,
/// sampled every `dt_s`; the last point is exactly back at zero.
std::vector<TrajectoryPoint> plan_stimulus(double displacement_mm, Axis axis, const ActuatorSpec& spec,
                                           double dt_s = 0.01);

}  // namespace gripkit

namespace gripkit {

/// Target at time `t_s` after onset, linearly interpolated; zero outside
/// the trajectory.
double trajectory_target(const std::vector<TrajectoryPoint>& traj, double t_s) noexcept;

inline double trajectory_duration(const std::vector<TrajectoryPoint>& traj) noexcept {
  return traj.empty() ? 0.0 : traj.back().t_s;
}

}  // namespace gripkit
