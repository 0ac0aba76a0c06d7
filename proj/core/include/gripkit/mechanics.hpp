#pragma once

// Force model of the two-lever gripper. Each finger presses a lever that
// pivots on a joint and pushes on a single force/torque sensor; the force
// channel sees the sum of both amplified grips and the torque channel their
// weighted difference, so two channels recover two grips.

namespace gripkit {

enum class Lever { One = 1, Two = 2 };

/// Geometry of one lever, stored as ratios only. Individual link lengths
/// are never needed by the force model.
struct LeverGeometry {
  double lever_ratio = 6.0;          ///< L_G / L_M, grip arm over sensor arm
  double aperture_arm_ratio = 0.3;   ///< L_A / L_G, friction moment arm over grip arm
  double d_m = 6.5e-3;               ///< contact offset from the sensor centre along the torque axis
  Lever side = Lever::One;

  void validate() const;
};

/// Normal and tangential loads on the tactor/aperture pair of one lever.
struct ContactState {
  double f_tactor_n = 0.0;     ///< normal force carried by the tactor
  double f_aperture_n = 0.0;   ///< normal force carried by the aperture ring
  double f_friction_n = 0.0;   ///< tangential tactor-skin friction
  double theta_rad = 0.0;      ///< direction of tactor motion relative to x
  double dy_over_lg = 0.0;     ///< tactor y displacement normalised by the grip arm length

  void validate() const;
};

struct SensorReading {
  double f_m_n = 0.0;    ///< force along the sensing axis
  double t_m_nm = 0.0;   ///< torque about y; positive when lever 1 dominates
  double t_s = 0.0;
};

struct GripEstimate {
  double f_grip_1_n = 0.0;
  double f_grip_2_n = 0.0;
  double f_mean_n = 0.0;
  double t_s = 0.0;

  /// The participant is touching the device. Estimates near zero grip can
  /// be slightly negative from sensor noise and are reported unclamped.
  bool in_contact() const noexcept { return f_mean_n > kContactThresholdN; }

  static constexpr double kContactThresholdN = 0.2;
};

struct CalibrationCoefficients {
  double alpha_1 = 0.0;
  double alpha_2 = 0.0;
  double beta_1_per_m = 0.0;
  double beta_2_per_m = 0.0;
  double d_1_m = 0.0;
  double d_2_m = 0.0;
  double ratio_1 = 0.0;
  double ratio_2 = 0.0;

  void validate() const;
};

/// Grip-equivalent artifact of one lever before lever amplification:
/// friction moment through the aperture arm plus the shift of the tactor
/// force's point of action.
double theoretical_artifact(const ContactState& contact, const LeverGeometry& geom);

/// Sensor force and torque produced by the two grips, artifacts included.
/// Throws on negative grip or non-finite contact state.
SensorReading forward_sensor(double grip_1_n, double grip_2_n,
                             const ContactState& contact_1, const ContactState& contact_2,
                             const LeverGeometry& geom_1, const LeverGeometry& geom_2,
                             double t_s = 0.0);

/// Per-side grips from one reading. Artifacts are unknown at run time and
/// are left in the estimate.
GripEstimate decompose(const SensorReading& reading, const CalibrationCoefficients& coeffs);

CalibrationCoefficients coefficients_from_geometry(const LeverGeometry& geom_1,
                                                   const LeverGeometry& geom_2);

/// Constants fitted on the reference device.
struct ReferenceDevice {
  static constexpr double kRatio1 = 6.132;
  static constexpr double kRatio2 = 6.017;
  static constexpr double kD1M = 7.17e-3;
  static constexpr double kD2M = 5.98e-3;

  static LeverGeometry lever_1() { return {kRatio1, 0.3, kD1M, Lever::One}; }
  static LeverGeometry lever_2() { return {kRatio2, 0.3, kD2M, Lever::Two}; }
};

}  // namespace gripkit
