#include "gripkit/trial_engine.hpp"

#include <algorithm>
#include <cmath>

namespace gripkit {

GripCommand split_grip(double mean_n, double side_bias) noexcept {
  const double total = 2.0 * std::max(0.0, mean_n);
  return {total * side_bias / (1.0 + side_bias), total / (1.0 + side_bias)};
}

ActuatorState homed_axis(Axis axis, const ActuatorSpec& spec) {
  return home(make_unhomed(axis, 0.0, spec), spec);
}

SyntheticParticipant::SyntheticParticipant(ParticipantModel model, std::uint64_t seed)
    : model_(model), rng_(seed) {
  model_.validate();
}

void SyntheticParticipant::begin_trial(const TrialSpec& spec) {
  voluntary_n_ = 0.0;
  noise_n_ = 0.0;
  const double scale = std::max(0.0, 1.0 + model_.reflex_trial_cv * rng_.normal());
  trial_amplitude_n_ = model_.reflex_amplitude_n(spec.condition) * scale;
}

GripCommand SyntheticParticipant::next(const GripContext& ctx) {
  const double dt = ctx.dt_s;
  const auto delay = static_cast<std::size_t>(std::lround(model_.visuomotor_delay_s / dt));
  double seen = 0.0;
  if (ctx.displayed_history != nullptr && ctx.displayed_history->size() > delay) {
    seen = (*ctx.displayed_history)[ctx.displayed_history->size() - 1 - delay];
  }

  if (ctx.phase == TrialPhase::Released) {
    voluntary_n_ -= model_.release_rate_per_s * voluntary_n_ * dt;
  } else {
    voluntary_n_ += model_.tracking_gain_per_s * (ctx.spec->condition.target_force_n - seen) * dt;
  }

  const double rho = std::exp(-dt / model_.motor_noise_tau_s);
  noise_n_ = rho * noise_n_ + std::sqrt(1.0 - rho * rho) * model_.motor_noise_sd_n * rng_.normal();

  double reflex = 0.0;
  if (ctx.stimulus_onset_s) {
    reflex = trial_amplitude_n_ * model_.reflex_shape(ctx.t_s - *ctx.stimulus_onset_s - model_.reflex_latency_s);
  }
  return split_grip(voluntary_n_ + noise_n_ + reflex, model_.side_bias);
}

TrialEngine::TrialEngine(const SimulationConfig& config, const TrialSpec& spec, std::uint64_t noise_seed,
                         ActuatorState x_axis, ActuatorState y_axis)
    : config_(config), spec_(spec), noise_(noise_seed), x_(x_axis), y_(y_axis) {
  record_.spec = spec;
  prev_x_mm_ = counts_to_mm(x_.position_counts, config_.actuator);
  prev_y_mm_ = counts_to_mm(y_.position_counts, config_.actuator);
}

TrialEngine::Tick TrialEngine::step(GripSource& source, int ticks) {
  Tick out;
  if (finished_) {
    out.finished = true;
    return out;
  }
  const double dt = 1.0 / config_.rig.sample_rate_hz;
  ticks = std::max(1, ticks);
  // Dropped ticks still move the actuators.
  for (int i = 1; i < ticks && tick_ >= 0; ++i) {
    ++tick_;
    x_ = control_step(x_, config_.actuator, dt);
    y_ = control_step(y_, config_.actuator, dt);
  }
  ++tick_;
  const double t = static_cast<double>(tick_) * dt;

  const double x_mm = counts_to_mm(x_.position_counts, config_.actuator);
  const double y_mm = counts_to_mm(y_.position_counts, config_.actuator);
  const double span = dt * ticks;
  TactorMotion motion{x_mm, y_mm, (x_mm - prev_x_mm_) / span, (y_mm - prev_y_mm_) / span};

  GripContext ctx{t, dt, phase_.phase, &spec_, &displayed_, record_.markers.stimulus_onset_s};
  const GripCommand grip = source.next(ctx);
  const SensorReading reading =
      rig_step(std::max(0.0, grip.grip_1_n), std::max(0.0, grip.grip_2_n), motion, TactorMotion{}, config_.rig,
               &noise_, t);
  const GripEstimate est = decompose(reading, config_.coefficients);

  const ActuatorState& stim_axis = config_.phases.stimulus_axis == Axis::X ? x_ : y_;
  const bool stimulus_done = stimulus_start_s_ &&
                             t - *stimulus_start_s_ >= trajectory_duration(trajectory_) - 1e-9 &&
                             stim_axis.settled(config_.actuator) && stim_axis.duty == 0.0;

  PhaseStep ps = advance(phase_, TickInput{t, est.f_mean_n, stimulus_done}, spec_, config_.phases);
  if (ps.start_stimulus) {
    trajectory_ = plan_stimulus(ps.start_stimulus->displacement_mm, ps.start_stimulus->axis, config_.actuator, dt);
    stimulus_start_s_ = t;
    record_.markers.stimulus_onset_s = t;
    out.stimulus_onset_s = t;
  }
  if (ps.state.stimulus_end_s && !record_.markers.stimulus_end_s) {
    record_.markers.stimulus_end_s = ps.state.stimulus_end_s;
  }
  phase_ = ps.state;

  out.sample = TrialSample{t, reading.f_m_n, reading.t_m_nm, est.f_grip_1_n, est.f_grip_2_n, est.f_mean_n,
                           x_mm, y_mm, phase_.phase};
  out.phase_changed = ps.phase_changed;
  record_.samples.push_back(out.sample);
  record_.true_grips.push_back({std::max(0.0, grip.grip_1_n), std::max(0.0, grip.grip_2_n)});
  displayed_.push_back(est.f_mean_n);

  // Command the stimulus axis for the next tick.
  if (stimulus_start_s_) {
    ActuatorState& axis = config_.phases.stimulus_axis == Axis::X ? x_ : y_;
    axis.target_counts = trajectory_target(trajectory_, t + dt - *stimulus_start_s_);
  }
  prev_x_mm_ = x_mm;
  prev_y_mm_ = y_mm;
  x_ = control_step(x_, config_.actuator, dt);
  y_ = control_step(y_, config_.actuator, dt);

  const bool timed_out = !phase_.finished && t >= config_.max_trial_s - 1e-9;
  if (phase_.finished || timed_out) {
    finished_ = true;
    record_.completed = phase_.finished && !phase_.aborted;
    record_.timed_out = timed_out;
  }
  record_.corrupt = phase_.corrupt;
  out.finished = finished_;
  return out;
}

}  // namespace gripkit
