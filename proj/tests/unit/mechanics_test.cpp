#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gripkit/error.hpp"
#include "gripkit/mechanics.hpp"

using namespace gripkit;

namespace {

CalibrationCoefficients reference_coeffs() {
  return coefficients_from_geometry(ReferenceDevice::lever_1(), ReferenceDevice::lever_2());
}

ContactState no_contact_artifact(double grip) {
  ContactState c;
  c.f_tactor_n = 0.2 * grip;
  c.f_aperture_n = 0.8 * grip;
  return c;
}

}  // namespace

TEST(Coefficients, ReferenceDeviceValues) {
  const auto c = reference_coeffs();
  EXPECT_NEAR(c.alpha_1, 0.074, 0.074 * 0.01);
  EXPECT_NEAR(c.alpha_2, 0.091, 0.091 * 0.01);
  EXPECT_NEAR(c.beta_1_per_m, 12.39, 12.39 * 0.005);
  EXPECT_NEAR(c.beta_2_per_m, 12.63, 12.63 * 0.005);
  EXPECT_NEAR(c.ratio_1 * c.d_1_m, 0.044, 0.0005);
  EXPECT_NEAR(c.ratio_2 * c.d_2_m, 0.036, 0.0005);
}

TEST(Coefficients, ClosedForms) {
  const auto c = reference_coeffs();
  const double d = 7.17e-3 + 5.98e-3;
  EXPECT_DOUBLE_EQ(c.alpha_1, 5.98e-3 / (6.132 * d));
  EXPECT_DOUBLE_EQ(c.alpha_2, 7.17e-3 / (6.017 * d));
  EXPECT_DOUBLE_EQ(c.beta_1_per_m, 1.0 / (6.132 * d));
  EXPECT_DOUBLE_EQ(c.beta_2_per_m, 1.0 / (6.017 * d));
}

TEST(Coefficients, OffsetsThatCancelAreRejected) {
  LeverGeometry a = ReferenceDevice::lever_1();
  LeverGeometry b = ReferenceDevice::lever_2();
  a.d_m = 3e-3;
  b.d_m = -3e-3;
  EXPECT_THROW(coefficients_from_geometry(a, b), Error);
}

TEST(Coefficients, SymmetricLevers) {
  const LeverGeometry g{6.0, 0.3, 6e-3, Lever::One};
  const auto c = coefficients_from_geometry(g, g);
  EXPECT_DOUBLE_EQ(c.alpha_1, 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(c.alpha_2, 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(c.beta_1_per_m, c.beta_2_per_m);
}

TEST(Forward, TenTenExample) {
  const auto r = forward_sensor(10, 10, no_contact_artifact(10), no_contact_artifact(10),
                                ReferenceDevice::lever_1(), ReferenceDevice::lever_2());
  EXPECT_NEAR(r.f_m_n, 121.49, 1e-9);
  EXPECT_NEAR(r.t_m_nm, 10 * (6.132 * 7.17e-3 - 6.017 * 5.98e-3), 1e-12);
  EXPECT_NEAR(r.t_m_nm, 0.07985, 1e-5);
}

TEST(Forward, ZeroIn) {
  const auto r = forward_sensor(0, 0, {}, {}, ReferenceDevice::lever_1(), ReferenceDevice::lever_2());
  EXPECT_EQ(r.f_m_n, 0.0);
  EXPECT_EQ(r.t_m_nm, 0.0);
}

TEST(Forward, SymmetricDeviceAntisymmetricTorque) {
  const LeverGeometry g1{6.0, 0.3, 6e-3, Lever::One};
  const LeverGeometry g2{6.0, 0.3, 6e-3, Lever::Two};
  EXPECT_DOUBLE_EQ(forward_sensor(7, 7, {}, {}, g1, g2).t_m_nm, 0.0);
  const auto ab = forward_sensor(3, 9, {}, {}, g1, g2);
  const auto ba = forward_sensor(9, 3, {}, {}, g1, g2);
  EXPECT_DOUBLE_EQ(ab.f_m_n, ba.f_m_n);
  EXPECT_DOUBLE_EQ(ab.t_m_nm, -ba.t_m_nm);
}

TEST(Forward, LinearInGrips) {
  const auto g1 = ReferenceDevice::lever_1();
  const auto g2 = ReferenceDevice::lever_2();
  const auto a = forward_sensor(2, 5, {}, {}, g1, g2);
  const auto b = forward_sensor(7, 1, {}, {}, g1, g2);
  const auto ab = forward_sensor(9, 6, {}, {}, g1, g2);
  EXPECT_NEAR(ab.f_m_n, a.f_m_n + b.f_m_n, 1e-12);
  EXPECT_NEAR(ab.t_m_nm, a.t_m_nm + b.t_m_nm, 1e-15);
}

TEST(Forward, RejectsNegativeGrip) {
  EXPECT_THROW(forward_sensor(-1, 0, {}, {}, ReferenceDevice::lever_1(), ReferenceDevice::lever_2()), Error);
}

TEST(Forward, RejectsNonFiniteContact) {
  ContactState bad;
  bad.theta_rad = std::numeric_limits<double>::quiet_NaN();
  try {
    forward_sensor(1, 1, bad, {}, ReferenceDevice::lever_1(), ReferenceDevice::lever_2());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::NonFinite);
  }
}

TEST(Decompose, InvertsForwardOnGrid) {
  LeverGeometry g1{5.2, 0.3, 8.1e-3, Lever::One};
  LeverGeometry g2{7.3, 0.3, 4.4e-3, Lever::Two};
  const auto c = coefficients_from_geometry(g1, g2);
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double a = i, b = j;
      const auto est = decompose(forward_sensor(a, b, {}, {}, g1, g2), c);
      const double scale = std::max(1.0, std::max(a, b));
      worst = std::max({worst, std::abs(est.f_grip_1_n - a) / scale, std::abs(est.f_grip_2_n - b) / scale});
    }
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Decompose, InvertsTheTenTenReading) {
  const auto est = decompose({121.49, 0.07985}, reference_coeffs());
  EXPECT_NEAR(est.f_grip_1_n, 10.0, 0.01);
  EXPECT_NEAR(est.f_grip_2_n, 10.0, 0.01);
}

TEST(Decompose, MeanIsAverageOfSides) {
  const auto est = decompose({60.0, 0.01, 0.5}, reference_coeffs());
  EXPECT_DOUBLE_EQ(est.f_mean_n, 0.5 * (est.f_grip_1_n + est.f_grip_2_n));
  EXPECT_DOUBLE_EQ(est.t_s, 0.5);
}

TEST(Decompose, DoesNotClampNegativeEstimates) {
  const auto est = decompose({0.0, -0.01}, reference_coeffs());
  EXPECT_LT(est.f_grip_1_n, 0.0);
  EXPECT_GT(est.f_grip_2_n, 0.0);
  EXPECT_FALSE(est.in_contact());
}

TEST(Decompose, ContactThreshold) {
  GripEstimate e;
  e.f_mean_n = 0.2;
  EXPECT_FALSE(e.in_contact());
  e.f_mean_n = 0.21;
  EXPECT_TRUE(e.in_contact());
}

TEST(Decompose, RejectsInvalidCoefficients) {
  CalibrationCoefficients c = reference_coeffs();
  c.beta_2_per_m = 0.0;
  try {
    decompose({1, 0}, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::CalibrationInvalid);
  }
}

TEST(Artifact, VanishesWithoutMotion) {
  EXPECT_DOUBLE_EQ(theoretical_artifact(no_contact_artifact(15), ReferenceDevice::lever_1()), 0.0);
}

TEST(Artifact, PureXMotionHasNoFrictionTerm) {
  ContactState c = no_contact_artifact(15);
  c.f_friction_n = 0.3;
  c.theta_rad = 0.0;
  EXPECT_NEAR(theoretical_artifact(c, ReferenceDevice::lever_1()), 0.0, 1e-15);
}

TEST(Artifact, HandExample) {
  ContactState c;
  c.f_tactor_n = 5.0;
  c.f_friction_n = 1.0;
  c.theta_rad = M_PI / 2;
  c.dy_over_lg = 0.05;
  EXPECT_NEAR(theoretical_artifact(c, ReferenceDevice::lever_1()), 0.55, 1e-12);
}

TEST(Artifact, NoLoadNoArtifact) {
  ContactState c;
  c.theta_rad = 1.0;
  c.dy_over_lg = 0.1;
  EXPECT_EQ(theoretical_artifact(c, ReferenceDevice::lever_2()), 0.0);
}

TEST(Artifact, ShiftOverestimatesGrip) {
  ContactState c = no_contact_artifact(10);
  c.dy_over_lg = 0.02;
  const auto est = decompose(forward_sensor(10, 0, c, {}, ReferenceDevice::lever_1(), ReferenceDevice::lever_2()),
                             reference_coeffs());
  EXPECT_GT(est.f_grip_1_n, 10.0);
}

TEST(Artifact, ClosedForm) {
  ContactState c = no_contact_artifact(15);
  c.f_friction_n = 0.3;
  c.theta_rad = M_PI / 2;
  c.dy_over_lg = 0.05;
  const double expected = 0.3 * 0.3 * 1.0 + 0.05 * c.f_tactor_n;
  EXPECT_NEAR(theoretical_artifact(c, ReferenceDevice::lever_1()), expected, 1e-12);
}

TEST(Artifact, AddsToTheGripOfItsLever) {
  ContactState c = no_contact_artifact(15);
  c.f_friction_n = 0.3;
  c.theta_rad = M_PI / 2;
  const double a = theoretical_artifact(c, ReferenceDevice::lever_1());
  const auto est = decompose(forward_sensor(15, 0, c, {}, ReferenceDevice::lever_1(), ReferenceDevice::lever_2()),
                             reference_coeffs());
  EXPECT_NEAR(est.f_grip_1_n, 15 + a, 1e-9);
  EXPECT_NEAR(est.f_grip_2_n, 0.0, 1e-9);
}
