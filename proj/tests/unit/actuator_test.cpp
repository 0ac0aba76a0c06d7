#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gripkit/actuator.hpp"
#include "gripkit/error.hpp"
#include "gripkit/rng.hpp"

using namespace gripkit;

namespace {

ActuatorState centred(const ActuatorSpec& spec) {
  return home(make_unhomed(Axis::X, 0.0, spec), spec);
}

// Position relative to the physical centre of the stroke.
double physical(const ActuatorState& s) { return s.position_counts - 0.5 * (s.stop_low_counts + s.stop_high_counts); }

int ticks_to_settle(ActuatorState s, const ActuatorSpec& spec, double target, int limit = 200) {
  s.target_counts = target;
  for (int k = 1; k <= limit; ++k) {
    s = control_step(s, spec);
    if (std::abs(s.position_counts - target) <= spec.settle_band_counts && s.duty == 0.0) return k;
  }
  return -1;
}

}  // namespace

TEST(ActuatorSpec, DerivedConstants) {
  const ActuatorSpec spec;
  EXPECT_NEAR(spec.mm_per_count(), 0.001134, 0.000001);
  EXPECT_NEAR(spec.mm_per_motor_rev(), 0.0136, 0.00005);
  EXPECT_NEAR(spec.speed_mm_per_s(), 6.88, 0.005);
}

TEST(Conversion, PaperFigures) {
  const ActuatorSpec spec;
  EXPECT_DOUBLE_EQ(counts_to_mm(617, spec), 0.7);
  EXPECT_NEAR(counts_to_mm(60, spec), 0.068, 0.0005);
  EXPECT_EQ(counts_to_mm(0, spec), 0.0);
  EXPECT_EQ(mm_to_counts(0.7, spec), 617);
}

TEST(Conversion, IntegerRoundTrip) {
  const ActuatorSpec spec;
  for (std::int64_t c = -1322; c <= 1322; ++c) ASSERT_EQ(mm_to_counts(counts_to_mm(c, spec), spec), c);
}

TEST(Control, ZeroErrorHolds) {
  const ActuatorSpec spec;
  ActuatorState s = centred(spec);
  s.target_counts = s.position_counts;
  const auto next = control_step(s, spec);
  EXPECT_EQ(next.duty, 0.0);
  EXPECT_EQ(next.position_counts, s.position_counts);
}

TEST(Control, UnhomedThrows) {
  const ActuatorSpec spec;
  try {
    control_step(make_unhomed(Axis::Y, 0.3, spec), spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::NotHomed);
  }
}

TEST(Control, FullStrokeStepSettlesInTime) {
  const ActuatorSpec spec;
  ActuatorState s = centred(spec);
  s.position_counts = 0.0;
  const int bound = static_cast<int>(std::ceil(1.5 / spec.speed_mm_per_s() / 0.01)) + 2;
  EXPECT_EQ(bound, 24);
  const int k = ticks_to_settle(s, spec, mm_to_counts(1.5, spec));
  EXPECT_GT(k, 0);
  EXPECT_LE(k, bound);
}

TEST(Control, SettledErrorWithinBandForAnyTarget) {
  const ActuatorSpec spec;
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    ActuatorState s = centred(spec);
    const double target = rng.uniform(-spec.travel_counts(), spec.travel_counts());
    s.target_counts = target;
    for (int k = 0; k < 100; ++k) s = control_step(s, spec);
    ASSERT_LE(std::abs(s.position_counts - target), spec.settle_band_counts);
    ASSERT_EQ(s.duty, 0.0);
  }
}

TEST(Control, TargetBeyondRangeClamps) {
  const ActuatorSpec spec;
  ActuatorState s = centred(spec);
  s.target_counts = 5000;
  for (int k = 0; k < 100; ++k) s = control_step(s, spec);
  EXPECT_DOUBLE_EQ(s.position_counts, spec.travel_counts());
  EXPECT_EQ(s.duty, spec.duty_max);
  EXPECT_TRUE(s.at_limit);
}

TEST(Homing, RandomOffsetsConvergeToOneZero) {
  const ActuatorSpec spec;
  Rng rng(5);
  const double reach = spec.travel_range_mm + spec.end_stop_margin_mm;
  std::vector<double> finals;
  for (int i = 0; i < 20; ++i) {
    const auto s = home(make_unhomed(Axis::X, rng.uniform(-reach, reach), spec), spec);
    EXPECT_TRUE(s.homed);
    EXPECT_LE(std::abs(s.position_counts), spec.settle_band_counts);
    finals.push_back(physical(s));
  }
  const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
  EXPECT_LE(*hi - *lo, 2 * spec.settle_band_counts);
  for (double f : finals) EXPECT_LE(std::abs(f), spec.settle_band_counts);
}

TEST(Homing, StartingAtTheStop) {
  const ActuatorSpec spec;
  const double reach = spec.travel_range_mm + spec.end_stop_margin_mm;
  const auto s = home(make_unhomed(Axis::Y, -reach, spec), spec);
  EXPECT_TRUE(s.homed);
  EXPECT_LE(std::abs(physical(s)), spec.settle_band_counts);
}

TEST(Homing, ThresholdAboveStallCurrentFails) {
  const ActuatorSpec spec;
  HomingOptions o;
  o.current_threshold_a = 10.0;
  try {
    home(make_unhomed(Axis::X, 0.2, spec), spec, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::HomingFailed);
  }
}

TEST(Homing, Idempotent) {
  const ActuatorSpec spec;
  const auto once = home(make_unhomed(Axis::X, 0.9, spec), spec);
  const auto twice = home(once, spec);
  EXPECT_LE(std::abs(physical(once) - physical(twice)), spec.settle_band_counts);
}

TEST(Stimulus, OutAndBack) {
  const ActuatorSpec spec;
  const auto traj = plan_stimulus(1.5, Axis::X, spec);
  double peak = 0.0, path = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    path += std::abs(traj[i].target_counts - traj[i - 1].target_counts);
    peak = std::max(peak, traj[i].target_counts);
  }
  EXPECT_NEAR(counts_to_mm(peak, spec), 1.5, 1e-12);
  EXPECT_NEAR(counts_to_mm(path, spec), 3.0, 1e-9);
  EXPECT_EQ(traj.front().target_counts, 0.0);
  EXPECT_EQ(traj.back().target_counts, 0.0);
  EXPECT_NEAR(trajectory_duration(traj), 0.436, 0.001);
}

TEST(Stimulus, HalfMillimetre) {
  const ActuatorSpec spec;
  const auto traj = plan_stimulus(0.5, Axis::X, spec);
  double path = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) path += std::abs(traj[i].target_counts - traj[i - 1].target_counts);
  EXPECT_NEAR(counts_to_mm(path, spec), 1.0, 1e-9);
}

TEST(Stimulus, LegsAreSymmetric) {
  const ActuatorSpec spec;
  const auto traj = plan_stimulus(1.0, Axis::X, spec);
  const double half = trajectory_duration(traj) / 2;
  for (double t = 0.0; t <= half; t += 0.003) {
    EXPECT_NEAR(trajectory_target(traj, half - t), trajectory_target(traj, half + t), 1e-6);
  }
}

TEST(Stimulus, OutOfRange) {
  const ActuatorSpec spec;
  EXPECT_THROW(plan_stimulus(0.0, Axis::X, spec), Error);
  EXPECT_THROW(plan_stimulus(1.6, Axis::X, spec), Error);
}
