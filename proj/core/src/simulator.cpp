#include "gripkit/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "gripkit/error.hpp"
#include "gripkit/trial_engine.hpp"

namespace gripkit {

void FingerPadModel::validate() const {
  if (!(tactor_share >= 0.0 && tactor_share <= 1.0)) {
    throw Error(ErrorCategory::InvalidArgument, "tactor_share must lie in [0, 1]");
  }
  if (!(friction_mu >= 0.0) || !(slip_speed_floor_mm_s > 0.0)) {
    throw Error(ErrorCategory::InvalidArgument, "friction parameters must be non-negative");
  }
}

void RigConfig::validate() const {
  for (const auto& g : geometry) g.validate();
  for (const auto& p : pads) p.validate();
  if (!(grip_arm_length_m > 0.0) || !(sample_rate_hz > 0.0)) {
    throw Error(ErrorCategory::InvalidArgument, "rig lengths and rates must be positive");
  }
  if (sensor_noise_sd_force_n < 0.0 || sensor_noise_sd_torque_nm < 0.0) {
    throw Error(ErrorCategory::InvalidArgument, "noise levels must be non-negative");
  }
}

ContactState contact_for(double grip_n, const TactorMotion& motion, const FingerPadModel& pad,
                         const RigConfig& config) {
  ContactState c;
  c.f_tactor_n = pad.tactor_share * grip_n;
  c.f_aperture_n = grip_n - c.f_tactor_n;
  const double speed = std::hypot(motion.vx_mm_s, motion.vy_mm_s);
  const double taper = std::min(1.0, speed / pad.slip_speed_floor_mm_s);
  c.f_friction_n = pad.friction_mu * c.f_tactor_n * taper;
  c.theta_rad = speed > 0.0 ? std::atan2(motion.vy_mm_s, motion.vx_mm_s) : 0.0;
  c.dy_over_lg = motion.y_mm * 1e-3 / config.grip_arm_length_m;
  return c;
}

SensorReading rig_step(double grip_1_n, double grip_2_n, const TactorMotion& side_1,
                       const TactorMotion& side_2, const RigConfig& config, Rng* noise, double t_s) {
  const ContactState c1 = contact_for(grip_1_n, side_1, config.pads[0], config);
  const ContactState c2 = contact_for(grip_2_n, side_2, config.pads[1], config);
  SensorReading r = forward_sensor(grip_1_n, grip_2_n, c1, c2, config.geometry[0], config.geometry[1], t_s);
  if (noise != nullptr) {
    // Both draws happen every tick so the stream position never depends on
    // the configured noise levels.
    const double nf = noise->normal();
    const double nt = noise->normal();
    r.f_m_n += config.sensor_noise_sd_force_n * nf;
    r.t_m_nm += config.sensor_noise_sd_torque_nm * nt;
  }
  return r;
}

void ParticipantModel::validate() const {
  if (!(reflex_latency_s > 0.0) || !(reflex_peak_s > 0.0) || !(reflex_decay_per_s > 0.0)) {
    throw Error(ErrorCategory::InvalidArgument, "reflex timing parameters must be positive");
  }
  for (double g : reflex_gain_per_mm) {
    if (!(g >= 0.0)) throw Error(ErrorCategory::InvalidArgument, "reflex gains must be non-negative");
  }
  if (!(tracking_gain_per_s >= 0.0) || !(motor_noise_sd_n >= 0.0) || !(side_bias > 0.0) ||
      !(visuomotor_delay_s >= 0.0) || !(motor_noise_tau_s > 0.0) || !(reflex_trial_cv >= 0.0)) {
    throw Error(ErrorCategory::InvalidArgument, "participant parameters out of range");
  }
}

double ParticipantModel::reflex_amplitude_n(const TrialCondition& c) const {
  return reflex_gain_per_mm[condition_index(c)] * c.displacement_mm;
}

double ParticipantModel::reflex_shape(double tau) const {
  if (tau <= 0.0) return 0.0;
  // tau^k exp(-decay tau) peaks at k/decay; choose k so that is reflex_peak_s.
  const double k = reflex_decay_per_s * reflex_peak_s;
  return std::pow(tau / reflex_peak_s, k) * std::exp(-reflex_decay_per_s * (tau - reflex_peak_s));
}

ParticipantModel PopulationSpec::paper_shaped_participant() {
  ParticipantModel m;
  // Peak reflex amplitudes (N): 5 N -> 0.06, 0.11, 0.19; 7.5 N -> 0.04, 0.08, 0.08.
  m.reflex_gain_per_mm = {0.06 / 0.5, 0.11 / 1.0, 0.19 / 1.5, 0.04 / 0.5, 0.08 / 1.0, 0.08 / 1.5};
  m.reflex_trial_cv = 0.2;
  m.side_bias = 1.1;
  return m;
}

ParticipantModel draw_participant(const PopulationSpec& population, Rng& rng) {
  ParticipantModel m = population.mean;
  const double subject_scale = std::exp(rng.normal(0.0, population.gain_subject_log_sd));
  for (double& g : m.reflex_gain_per_mm) {
    g *= subject_scale * std::exp(rng.normal(0.0, population.gain_condition_log_sd));
  }
  m.side_bias *= std::exp(rng.normal(0.0, population.side_bias_log_sd));
  m.tracking_gain_per_s *= std::exp(rng.normal(0.0, population.tracking_log_sd));
  return m;
}

SubjectSeeds subject_seeds(std::uint64_t study_seed, int subject_index) {
  const auto i = static_cast<std::uint64_t>(subject_index);
  return {Rng::mix(study_seed, 2 * i), Rng::mix(study_seed, 2 * i + 1)};
}

std::uint64_t trial_seed(std::uint64_t session_seed, int trial_index) {
  return Rng::mix(session_seed, static_cast<std::uint64_t>(trial_index));
}

namespace {

TrialRecord run_trial(const TrialSpec& spec, SyntheticParticipant& participant, const SimulationConfig& config,
                      std::uint64_t noise_seed) {
  TrialEngine engine(config, spec, noise_seed, homed_axis(Axis::X, config.actuator),
                     homed_axis(Axis::Y, config.actuator));
  participant.begin_trial(spec);
  while (!engine.finished()) engine.step(participant);
  return engine.take_record();
}

}  // namespace

TrialRecord run_synthetic_trial(const TrialSpec& spec, const ParticipantModel& participant,
                                const SimulationConfig& config, std::uint64_t seed) {
  participant.validate();
  config.rig.validate();
  SyntheticParticipant p(participant, Rng::mix(seed, 0xBEEF));
  return run_trial(spec, p, config, seed);
}

TrialRecord run_synthetic_trial(const TrialCondition& condition, const ParticipantModel& participant,
                                const SimulationConfig& config, std::uint64_t seed) {
  return run_synthetic_trial(TrialSpec{condition, 2.0, 0, 0, false}, participant, config, seed);
}

SessionRecording run_synthetic_session(const SessionPlan& plan, const ParticipantModel& participant,
                                       const SimulationConfig& config, std::uint64_t session_seed) {
  participant.validate();
  config.rig.validate();
  SessionRecording rec;
  rec.seed = session_seed;
  rec.plan = plan;
  SyntheticParticipant p(participant, Rng::mix(session_seed, 0xBEEF));
  for (const auto& spec : plan.all_trials()) {
    rec.trials.push_back(run_trial(spec, p, config, trial_seed(session_seed, spec.trial_index)));
  }
  return rec;
}

std::vector<SessionRecording> run_synthetic_study(int n_subjects, const PopulationSpec& population,
                                                  const SimulationConfig& config, std::uint64_t seed) {
  if (n_subjects < 2) throw Error(ErrorCategory::InvalidArgument, "a study needs at least two subjects");
  const SessionPlan plan = plan_session(seed);
  std::vector<SessionRecording> out;
  out.reserve(static_cast<std::size_t>(n_subjects));
  for (int s = 0; s < n_subjects; ++s) {
    const auto seeds = subject_seeds(seed, s);
    Rng draw(seeds.participant);
    const ParticipantModel model = draw_participant(population, draw);
    SessionRecording rec = run_synthetic_session(plan, model, config, seeds.session);
    char id[32];
    std::snprintf(id, sizeof id, "S%02d", s + 1);
    rec.participant = id;
    rec.session_id = "synthetic-" + std::to_string(seed) + "-" + id;
    out.push_back(std::move(rec));
  }
  return out;
}

SweepRecord generate_sweep(Lever lever, const RigConfig& rig, const SweepOptions& options) {
  if (options.points < 2) throw Error(ErrorCategory::InvalidArgument, "sweep needs at least two points");
  rig.validate();
  RigConfig cfg = rig;
  cfg.pads[0].tactor_share = options.tactor_share;
  cfg.pads[1].tactor_share = options.tactor_share;
  cfg.sensor_noise_sd_force_n = options.noise_sd_force_n;
  cfg.sensor_noise_sd_torque_nm = options.noise_sd_torque_nm;
  Rng noise(options.seed);

  SweepRecord sweep;
  sweep.lever = lever;
  for (int i = 0; i < options.points; ++i) {
    const double load = options.max_force_n * i / (options.points - 1);
    const double g1 = lever == Lever::One ? load : 0.0;
    const double g2 = lever == Lever::Two ? load : 0.0;
    const double t = 0.1 * i;
    sweep.samples.push_back({load, rig_step(g1, g2, {}, {}, cfg, &noise, t)});
  }
  return sweep;
}

ArtifactRun simulate_artifact_characterization(Axis axis, const SimulationConfig& config, double grip_n,
                                               double displacement_mm) {
  const double dt = 1.0 / config.rig.sample_rate_hz;
  RigConfig rig = config.rig;
  rig.sensor_noise_sd_force_n = 0.0;
  rig.sensor_noise_sd_torque_nm = 0.0;

  ActuatorState moving = homed_axis(axis, config.actuator);
  const auto traj = plan_stimulus(displacement_mm, axis, config.actuator, dt);
  const double lead_in = 0.1;
  const double total = lead_in + trajectory_duration(traj) + 0.3;

  ArtifactRun run;
  double prev_mm = counts_to_mm(moving.position_counts, config.actuator);
  for (std::int64_t k = 0; static_cast<double>(k) * dt <= total; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double pos_mm = counts_to_mm(moving.position_counts, config.actuator);
    const double vel = k == 0 ? 0.0 : (pos_mm - prev_mm) / dt;
    TactorMotion m;
    if (axis == Axis::X) {
      m.x_mm = pos_mm;
      m.vx_mm_s = vel;
    } else {
      m.y_mm = pos_mm;
      m.vy_mm_s = vel;
    }
    const ContactState c = contact_for(grip_n, m, rig.pads[0], rig);
    const SensorReading r = rig_step(grip_n, 0.0, m, {}, rig, nullptr, t);
    const GripEstimate e = decompose(r, config.coefficients);
    run.t_s.push_back(t);
    run.external_n.push_back(grip_n);
    run.device_n.push_back(e.f_grip_1_n);
    run.theoretical_artifact_n.push_back(theoretical_artifact(c, rig.geometry[0]));
    run.tactor_mm.push_back(pos_mm);

    prev_mm = pos_mm;
    moving.target_counts = trajectory_target(traj, t + dt - lead_in);
    moving = control_step(moving, config.actuator, dt);
  }
  return run;
}

}  // namespace gripkit
