#include "gripkit/actuator.hpp"

#include <algorithm>
#include <cmath>

#include "gripkit/error.hpp"

namespace gripkit {

const char* axis_name(Axis axis) noexcept { return axis == Axis::X ? "X" : "Y"; }

std::int64_t ActuatorState::encoder_counts() const noexcept { return std::llround(position_counts); }

bool ActuatorState::settled(const ActuatorSpec& spec) const noexcept {
  return std::abs(target_counts - position_counts) <= spec.settle_band_counts;
}

double counts_to_mm(double counts, const ActuatorSpec& spec) noexcept {
  return counts * spec.pitch_mm / spec.counts_per_output_rev;
}

std::int64_t mm_to_counts(double mm, const ActuatorSpec& spec) noexcept {
  return std::llround(mm * spec.counts_per_output_rev / spec.pitch_mm);
}

ActuatorState make_unhomed(Axis axis, double offset_mm, const ActuatorSpec& spec) {
  ActuatorState s;
  s.axis = axis;
  const double half = spec.half_stroke_counts();
  const double offset = offset_mm / spec.mm_per_count();
  s.stop_low_counts = -half - offset;
  s.stop_high_counts = half - offset;
  s.current_a = spec.current_baseline_a;
  return s;
}

namespace {

// Moves the link by the commanded duty for one tick, stopping at the
// mechanical stops and the software limits (once homed).
ActuatorState drive(ActuatorState s, const ActuatorSpec& spec, double duty, double dt_s) {
  s.duty = duty;
  double next = s.position_counts + duty * spec.speed_counts_per_s() * dt_s;

  double lo = s.stop_low_counts;
  double hi = s.stop_high_counts;
  if (s.homed) {
    lo = std::max(lo, -spec.travel_counts());
    hi = std::min(hi, spec.travel_counts());
  }
  bool blocked = false;
  if (next <= lo && duty < 0.0) {
    blocked = next <= s.stop_low_counts;
    s.at_limit = true;
    next = lo;
  } else if (next >= hi && duty > 0.0) {
    blocked = next >= s.stop_high_counts;
    s.at_limit = true;
    next = hi;
  }
  s.position_counts = next;
  s.current_a = spec.current_baseline_a + spec.current_per_duty_a * std::abs(duty) +
                (blocked ? spec.current_stall_a : 0.0);
  return s;
}

}  // namespace

ActuatorState control_step(const ActuatorState& state, const ActuatorSpec& spec, double dt_s) {
  if (!state.homed) {
    throw Error(ErrorCategory::NotHomed, std::string("axis ") + axis_name(state.axis) + " is not homed");
  }
  const double error = state.target_counts - state.position_counts;
  double duty = 0.0;
  if (error > spec.settle_band_counts) {
    duty = spec.duty_max;
  } else if (error < -spec.settle_band_counts) {
    duty = -spec.duty_max;
  }
  ActuatorState s = state;
  s.at_limit = std::abs(state.target_counts) > spec.travel_counts();
  return drive(s, spec, duty, dt_s);
}

ActuatorState home(const ActuatorState& state, const ActuatorSpec& spec, const HomingOptions& options) {
  ActuatorState s = state;
  s.homed = false;
  s.at_limit = false;

  const double full_stroke = 2.0 * spec.half_stroke_counts();
  const double per_tick = spec.speed_counts_per_s() * spec.duty_max * options.dt_s;
  const int timeout_ticks = static_cast<int>(std::ceil(full_stroke / per_tick)) + 10;

  bool stalled = false;
  for (int tick = 0; tick < timeout_ticks; ++tick) {
    s = drive(s, spec, -spec.duty_max, options.dt_s);
    if (s.current_a > options.current_threshold_a) {
      stalled = true;
      break;
    }
  }
  if (!stalled) {
    throw Error(ErrorCategory::HomingFailed,
                std::string("no stall detected on axis ") + axis_name(s.axis) + " within full travel");
  }

  // Re-zero at the centre of the stroke measured from the low stop.
  const double shift = s.stop_low_counts + spec.half_stroke_counts();
  s.position_counts -= shift;
  s.stop_low_counts -= shift;
  s.stop_high_counts -= shift;
  s.homed = true;
  s.at_limit = false;
  s.target_counts = 0.0;
  for (int tick = 0; tick < timeout_ticks && !(s.settled(spec) && s.duty == 0.0); ++tick) {
    s = control_step(s, spec, options.dt_s);
  }
  s.duty = 0.0;
  s.current_a = spec.current_baseline_a;
  return s;
}

std::vector<TrajectoryPoint> plan_stimulus(double displacement_mm, Axis /*axis*/, const ActuatorSpec& spec,
                                           double dt_s) {
  require_finite(displacement_mm, "displacement");
  if (displacement_mm <= 0.0 || displacement_mm > spec.travel_range_mm) {
    throw Error(ErrorCategory::OutOfRange, "stimulus displacement outside (0, travel range]");
  }
  const double peak = displacement_mm / spec.mm_per_count();
  const double speed = spec.speed_counts_per_s();
  const double half_time = peak / speed;
  const double duration = 2.0 * half_time;

  // Tick-aligned samples plus the exact turnaround and end points, so the
  // outbound and return legs have the same length.
  std::vector<TrajectoryPoint> traj;
  const auto ticks = static_cast<std::size_t>(std::ceil(duration / dt_s));
  traj.reserve(ticks + 3);
  bool turned = false;
  for (std::size_t k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * dt_s;
    if (!turned && t >= half_time) {
      traj.push_back({half_time, peak});
      turned = true;
      if (t == half_time) continue;
    }
    if (t >= duration) break;
    const double pos = t <= half_time ? speed * t : peak - speed * (t - half_time);
    traj.push_back({t, pos});
  }
  traj.push_back({duration, 0.0});
  return traj;
}

}  // namespace gripkit

namespace gripkit {

double trajectory_target(const std::vector<TrajectoryPoint>& traj, double t_s) noexcept {
  if (traj.empty() || t_s <= traj.front().t_s || t_s >= traj.back().t_s) return 0.0;
  const auto it = std::lower_bound(traj.begin(), traj.end(), t_s,
                                   [](const TrajectoryPoint& p, double t) { return p.t_s < t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (b.t_s == a.t_s) return b.target_counts;
  const double w = (t_s - a.t_s) / (b.t_s - a.t_s);
  return a.target_counts + w * (b.target_counts - a.target_counts);
}

}  // namespace gripkit
