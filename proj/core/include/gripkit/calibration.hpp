#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gripkit/mechanics.hpp"

namespace gripkit {

struct SweepSample {
  double external_force_n = 0.0;
  SensorReading reading;
};

/// Known external loads applied to one lever while the device sensor records.
struct SweepRecord {
  Lever lever = Lever::One;
  std::vector<SweepSample> samples;
};

struct FitOptions {
  double r2_floor = 0.99;
  double intercept_warn_n = 0.2;
  std::size_t min_samples = 10;
  /// Required span of external force as a fraction of the 0..20 N range.
  double min_span_fraction = 0.5;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope*x + intercept. Needs two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct LeverFit {
  Lever lever = Lever::One;
  double slope_force = 0.0;        ///< fitted L_G/L_M
  double slope_torque_m = 0.0;     ///< fitted (L_G/L_M)*d, sign folded positive
  double intercept_force_n = 0.0;
  double intercept_torque_nm = 0.0;
  double r2_force = 0.0;
  double r2_torque = 0.0;
  std::vector<std::string> warnings;
};

/// Regresses sensor force and torque on the applied load. Lever 2 pushes
/// the torque channel negative; its slope is folded so both levers report
/// a positive (L_G/L_M)*d. Quality problems become warnings on the fit.
LeverFit fit_lever(const SweepRecord& sweep, const FitOptions& options = {});

/// d_i = torque slope / force slope, then the alpha/beta definitions.
CalibrationCoefficients solve_coefficients(const LeverFit& fit_1, const LeverFit& fit_2);

struct ArtifactSample {
  double t_s = 0.0;
  double f_external_n = 0.0;
  double f_device_n = 0.0;
  std::optional<double> a_tm;   ///< empty below the guard threshold
};

struct ArtifactSeries {
  std::vector<ArtifactSample> samples;
  double max_abs_a_tm = 0.0;
  std::size_t defined_count = 0;
};

/// Relative movement artifact (external - device) / external, sample by
/// sample. Loads under `guard_n` are left undefined.
ArtifactSeries artifact_ratio(std::span<const double> t_s,
                              std::span<const double> external_n,
                              std::span<const double> device_n,
                              double guard_n = 1.0);

/// Sweep CSV: header `t_s,external_force_N,f_m_N,t_m_Nm,lever_id`, one row
/// per sample, lever_id 1 or 2. Returns one record per lever present.
std::vector<SweepRecord> read_sweep_csv(std::istream& in, const std::string& source_name);
std::vector<SweepRecord> read_sweep_csv_file(const std::string& path);
void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> sweeps);

struct CalibrationReport {
  LeverFit fit_1;
  LeverFit fit_2;
  CalibrationCoefficients coefficients;
};

/// Fits both levers of a two-lever sweep set and solves the coefficients.
CalibrationReport calibrate(std::span<const SweepRecord> sweeps, const FitOptions& options = {});

}  // namespace gripkit
