#include "gripkit/mechanics.hpp"

#include <cmath>

#include "gripkit/error.hpp"

namespace gripkit {

void LeverGeometry::validate() const {
  require_finite(lever_ratio, "lever_ratio");
  require_finite(aperture_arm_ratio, "aperture_arm_ratio");
  require_finite(d_m, "d");
  if (lever_ratio <= 0.0 || aperture_arm_ratio <= 0.0 || d_m <= 0.0) {
    throw Error(ErrorCategory::InvalidArgument, "lever geometry must be positive");
  }
}

void ContactState::validate() const {
  require_finite(f_tactor_n, "f_tactor");
  require_finite(f_aperture_n, "f_aperture");
  require_finite(f_friction_n, "f_friction");
  require_finite(theta_rad, "theta");
  require_finite(dy_over_lg, "dy/L_G");
}

void CalibrationCoefficients::validate() const {
  for (double v : {alpha_1, alpha_2, beta_1_per_m, beta_2_per_m, d_1_m, d_2_m, ratio_1, ratio_2}) {
    require_finite(v, "calibration coefficient");
    if (v <= 0.0) {
      throw Error(ErrorCategory::CalibrationInvalid, "calibration coefficients must be positive");
    }
  }
}

double theoretical_artifact(const ContactState& contact, const LeverGeometry& geom) {
  return geom.aperture_arm_ratio * contact.f_friction_n * std::sin(contact.theta_rad) +
         contact.dy_over_lg * contact.f_tactor_n;
}

SensorReading forward_sensor(double grip_1_n, double grip_2_n,
                             const ContactState& contact_1, const ContactState& contact_2,
                             const LeverGeometry& geom_1, const LeverGeometry& geom_2,
                             double t_s) {
  require_finite(grip_1_n, "grip_1");
  require_finite(grip_2_n, "grip_2");
  if (grip_1_n < 0.0 || grip_2_n < 0.0) {
    throw Error(ErrorCategory::InvalidArgument, "grip force must be non-negative");
  }
  contact_1.validate();
  contact_2.validate();
  geom_1.validate();
  geom_2.validate();

  const double load_1 = geom_1.lever_ratio * (grip_1_n + theoretical_artifact(contact_1, geom_1));
  const double load_2 = geom_2.lever_ratio * (grip_2_n + theoretical_artifact(contact_2, geom_2));
  return {load_1 + load_2, geom_1.d_m * load_1 - geom_2.d_m * load_2, t_s};
}

GripEstimate decompose(const SensorReading& reading, const CalibrationCoefficients& coeffs) {
  require_finite(reading.f_m_n, "f_m");
  require_finite(reading.t_m_nm, "t_m");
  coeffs.validate();
  GripEstimate out;
  out.f_grip_1_n = coeffs.alpha_1 * reading.f_m_n + coeffs.beta_1_per_m * reading.t_m_nm;
  out.f_grip_2_n = coeffs.alpha_2 * reading.f_m_n - coeffs.beta_2_per_m * reading.t_m_nm;
  out.f_mean_n = (out.f_grip_1_n + out.f_grip_2_n) / 2.0;
  out.t_s = reading.t_s;
  return out;
}

CalibrationCoefficients coefficients_from_geometry(const LeverGeometry& geom_1,
                                                   const LeverGeometry& geom_2) {
  geom_1.validate();
  geom_2.validate();
  const double span = geom_1.d_m + geom_2.d_m;
  if (span == 0.0) {
    throw Error(ErrorCategory::InvalidArgument, "d_1 + d_2 must be non-zero");
  }
  CalibrationCoefficients c;
  c.ratio_1 = geom_1.lever_ratio;
  c.ratio_2 = geom_2.lever_ratio;
  c.d_1_m = geom_1.d_m;
  c.d_2_m = geom_2.d_m;
  c.alpha_1 = geom_2.d_m / (geom_1.lever_ratio * span);
  c.alpha_2 = geom_1.d_m / (geom_2.lever_ratio * span);
  c.beta_1_per_m = 1.0 / (geom_1.lever_ratio * span);
  c.beta_2_per_m = 1.0 / (geom_2.lever_ratio * span);
  return c;
}

}  // namespace gripkit
