#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gripkit/simulator.hpp"

namespace gripkit {

struct GripCommand {
  double grip_1_n = 0.0;
  double grip_2_n = 0.0;
};

/// What a grip source can observe at a tick.
struct GripContext {
  double t_s = 0.0;
  double dt_s = 0.01;
  TrialPhase phase = TrialPhase::RampUp;
  const TrialSpec* spec = nullptr;
  /// Mean force shown on the bar for each past tick of this trial.
  const std::vector<double>* displayed_history = nullptr;
  /// Set once the tactor has started moving (felt, not seen).
  std::optional<double> stimulus_onset_s;
};

/// Supplies the hand: a synthetic participant, a replay script, or the
/// live input channel.
class GripSource {
 public:
  virtual ~GripSource() = default;
  virtual void begin_trial(const TrialSpec& /*spec*/) {}
  virtual GripCommand next(const GripContext& ctx) = 0;
};

/// Participant stand-in: pursues the target using the (delayed) displayed
/// force, adds correlated motor noise, and answers the tactor with a reflex
/// bump after a fixed latency.
class SyntheticParticipant : public GripSource {
 public:
  SyntheticParticipant(ParticipantModel model, std::uint64_t seed);

  void begin_trial(const TrialSpec& spec) override;
  GripCommand next(const GripContext& ctx) override;

  const ParticipantModel& model() const noexcept { return model_; }

 private:
  ParticipantModel model_;
  Rng rng_;
  double voluntary_n_ = 0.0;
  double noise_n_ = 0.0;
  double trial_amplitude_n_ = 0.0;
};

/// Splits a mean grip into per-side grips with a fixed finger/thumb ratio.
GripCommand split_grip(double mean_n, double side_bias) noexcept;

/// Ticks rig, decomposition, trial state machine and tactor actuators for
/// one trial. Time is virtual: tick k is at k * dt.
class TrialEngine {
 public:
  struct Tick {
    TrialSample sample;
    bool phase_changed = false;
    bool finished = false;
    std::optional<double> stimulus_onset_s;
  };

  TrialEngine(const SimulationConfig& config, const TrialSpec& spec, std::uint64_t noise_seed,
              ActuatorState x_axis, ActuatorState y_axis);

  /// Advances `ticks` control periods (more than one models dropped samples)
  /// and records one sample.
  Tick step(GripSource& source, int ticks = 1);

  bool finished() const noexcept { return finished_; }
  const PhaseState& phase_state() const noexcept { return phase_; }
  const ActuatorState& axis_state(Axis a) const noexcept { return a == Axis::X ? x_ : y_; }
  const TrialRecord& record() const noexcept { return record_; }
  TrialRecord take_record() { return std::move(record_); }

 private:
  SimulationConfig config_;
  TrialSpec spec_;
  Rng noise_;
  ActuatorState x_;
  ActuatorState y_;
  PhaseState phase_;
  TrialRecord record_;
  std::vector<double> displayed_;
  std::vector<TrajectoryPoint> trajectory_;
  std::optional<double> stimulus_start_s_;
  std::int64_t tick_ = -1;
  double prev_x_mm_ = 0.0;
  double prev_y_mm_ = 0.0;
  bool finished_ = false;
};

/// A homed, centred axis ready for a session.
ActuatorState homed_axis(Axis axis, const ActuatorSpec& spec);

}  // namespace gripkit
