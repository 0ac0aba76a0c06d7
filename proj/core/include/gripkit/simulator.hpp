#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gripkit/actuator.hpp"
#include "gripkit/calibration.hpp"
#include "gripkit/mechanics.hpp"
#include "gripkit/protocol.hpp"
#include "gripkit/rng.hpp"

namespace gripkit {

struct FingerPadModel {
  double friction_mu = 0.1;            ///< tactor-skin kinetic friction
  double tactor_share = 0.2;           ///< fraction of grip carried by the tactor
  double slip_speed_floor_mm_s = 0.1;  ///< friction tapers linearly to zero below this speed

  void validate() const;
};

struct RigConfig {
  std::array<LeverGeometry, 2> geometry{ReferenceDevice::lever_1(), ReferenceDevice::lever_2()};
  std::array<FingerPadModel, 2> pads{};
  double grip_arm_length_m = 0.030;    ///< L_G, only scales the point-of-action artifact
  double sensor_noise_sd_force_n = 0.0;
  double sensor_noise_sd_torque_nm = 0.0;
  double sample_rate_hz = 100.0;

  void validate() const;
};

/// Tactor kinematics on one lever, relative to its homed centre.
struct TactorMotion {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double vx_mm_s = 0.0;
  double vy_mm_s = 0.0;
};

/// Normal-force split, friction and point-of-action shift for one lever.
ContactState contact_for(double grip_n, const TactorMotion& motion, const FingerPadModel& pad,
                         const RigConfig& config);

/// Sensor reading for the two grips with the tactors in the given motion.
/// Adds Gaussian sensor noise when `noise` is non-null.
SensorReading rig_step(double grip_1_n, double grip_2_n, const TactorMotion& side_1,
                       const TactorMotion& side_2, const RigConfig& config, Rng* noise, double t_s = 0.0);

struct ParticipantModel {
  double tracking_gain_per_s = 1.8;    ///< first-order pursuit of the target on the bar
  double visuomotor_delay_s = 0.2;     ///< the bar the participant reacts to is this old
  double motor_noise_sd_n = 0.02;
  double motor_noise_tau_s = 0.05;     ///< correlation time of the motor noise
  double reflex_latency_s = 0.1;
  double reflex_peak_s = 0.12;         ///< from reflex start to its peak
  double reflex_decay_per_s = 4.0;
  /// N/mm per condition, indexed like `all_conditions()`.
  std::array<double, kConditionCount> reflex_gain_per_mm{};
  double reflex_trial_cv = 0.0;        ///< trial-to-trial variability of the reflex amplitude
  double side_bias = 1.0;              ///< finger (lever 1) over thumb (lever 2)
  double release_rate_per_s = 8.0;

  void validate() const;
  double reflex_amplitude_n(const TrialCondition& c) const;
  /// Gamma-shaped bump with unit peak at `reflex_peak_s` after the reflex starts.
  double reflex_shape(double since_reflex_start_s) const;
};

struct SimulationConfig {
  RigConfig rig;
  CalibrationCoefficients coefficients = coefficients_from_geometry(rig.geometry[0], rig.geometry[1]);
  ActuatorSpec actuator;
  PhaseConfig phases;
  double max_trial_s = 60.0;
};

/// One trial executed end to end against a synthetic participant.
TrialRecord run_synthetic_trial(const TrialSpec& spec, const ParticipantModel& participant,
                                const SimulationConfig& config, std::uint64_t seed);
TrialRecord run_synthetic_trial(const TrialCondition& condition, const ParticipantModel& participant,
                                const SimulationConfig& config, std::uint64_t seed);

/// Between-subject variation around a population mean participant.
struct PopulationSpec {
  ParticipantModel mean = paper_shaped_participant();
  double gain_subject_log_sd = 0.25;      ///< shared across a subject's conditions
  double gain_condition_log_sd = 0.10;    ///< subject-by-condition jitter
  double side_bias_log_sd = 0.05;
  double tracking_log_sd = 0.10;

  /// Reflex larger at 5 N than 7.5 N, growing with displacement, flat from
  /// 1.0 to 1.5 mm at 7.5 N.
  static ParticipantModel paper_shaped_participant();
};

/// Log-normal draws around the population mean.
ParticipantModel draw_participant(const PopulationSpec& population, Rng& rng);

/// Seeds used for subject `subject_index` of a study seeded with `study_seed`.
struct SubjectSeeds {
  std::uint64_t participant;
  std::uint64_t session;
};
SubjectSeeds subject_seeds(std::uint64_t study_seed, int subject_index);
/// Noise seed for one trial of a session.
std::uint64_t trial_seed(std::uint64_t session_seed, int trial_index);

/// All 70 trials of `plan` against one participant.
SessionRecording run_synthetic_session(const SessionPlan& plan, const ParticipantModel& participant,
                                       const SimulationConfig& config, std::uint64_t session_seed);

/// Every subject runs the same plan (seeded by `seed`), as in the study.
std::vector<SessionRecording> run_synthetic_study(int n_subjects, const PopulationSpec& population,
                                                  const SimulationConfig& config, std::uint64_t seed);

struct SweepOptions {
  int points = 41;
  double max_force_n = 20.0;
  double noise_sd_force_n = 0.0;
  double noise_sd_torque_nm = 0.0;
  double tactor_share = 0.2;
  std::uint64_t seed = 0;
};

/// Calibration-stand sweep: a known load on one lever, the other free.
SweepRecord generate_sweep(Lever lever, const RigConfig& rig, const SweepOptions& options = {});

struct ArtifactRun {
  std::vector<double> t_s;
  std::vector<double> external_n;
  std::vector<double> device_n;
  std::vector<double> theoretical_artifact_n;   ///< closed-form A_T per sample
  std::vector<double> tactor_mm;
};

/// Calibration-stand artifact test: a constant load on lever 1 while its
/// tactor moves out and back along `axis`. Noise-free.
ArtifactRun simulate_artifact_characterization(Axis axis, const SimulationConfig& config, double grip_n = 15.0,
                                               double displacement_mm = 1.5);

}  // namespace gripkit
