#include "gripkit/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gripkit/csv.hpp"
#include "gripkit/error.hpp"

namespace gripkit {

namespace {

constexpr double kSweepRangeN = 20.0;

std::string format_warning(const char* what, double value) {
  std::ostringstream os;
  os << what << " (" << value << ")";
  return os.str();
}

}  // namespace

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCategory::LengthMismatch, "regression inputs differ in length");
  }
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) {
    throw Error(ErrorCategory::SingularDesign, "regression needs at least two samples");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) {
    throw Error(ErrorCategory::SingularDesign, "all applied forces are equal");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

LeverFit fit_lever(const SweepRecord& sweep, const FitOptions& options) {
  if (sweep.samples.size() < options.min_samples) {
    throw Error(ErrorCategory::InvalidArgument,
                "sweep has " + std::to_string(sweep.samples.size()) + " samples, needs " +
                    std::to_string(options.min_samples));
  }
  std::vector<double> load, force, torque;
  load.reserve(sweep.samples.size());
  force.reserve(sweep.samples.size());
  torque.reserve(sweep.samples.size());
  for (const auto& s : sweep.samples) {
    require_finite(s.external_force_n, "external force");
    require_finite(s.reading.f_m_n, "f_m");
    require_finite(s.reading.t_m_nm, "t_m");
    if (s.external_force_n < 0.0) {
      throw Error(ErrorCategory::InvalidArgument, "external force must be non-negative");
    }
    load.push_back(s.external_force_n);
    force.push_back(s.reading.f_m_n);
    torque.push_back(s.reading.t_m_nm);
  }
  const auto [lo, hi] = std::minmax_element(load.begin(), load.end());
  if (*hi == *lo) {
    throw Error(ErrorCategory::SingularDesign, "all applied forces are equal");
  }
  if (*hi - *lo < options.min_span_fraction * kSweepRangeN) {
    throw Error(ErrorCategory::InvalidArgument, "sweep spans too little of the 0..20 N range");
  }

  const LineFit ff = fit_line(load, force);
  LineFit tf = fit_line(load, torque);
  if (sweep.lever == Lever::Two && tf.slope < 0.0) {
    tf.slope = -tf.slope;
    tf.intercept = -tf.intercept;
  }

  LeverFit fit;
  fit.lever = sweep.lever;
  fit.slope_force = ff.slope;
  fit.slope_torque_m = tf.slope;
  fit.intercept_force_n = ff.intercept;
  fit.intercept_torque_nm = tf.intercept;
  fit.r2_force = ff.r2;
  fit.r2_torque = tf.r2;
  if (ff.r2 < options.r2_floor) fit.warnings.push_back(format_warning("force fit R^2 below floor", ff.r2));
  if (tf.r2 < options.r2_floor) fit.warnings.push_back(format_warning("torque fit R^2 below floor", tf.r2));
  // Intercept is expressed as grip-equivalent force so the threshold is in newtons.
  if (ff.slope > 0.0 && std::abs(ff.intercept / ff.slope) > options.intercept_warn_n) {
    fit.warnings.push_back(format_warning("force intercept exceeds limit, N", ff.intercept / ff.slope));
  }
  return fit;
}

CalibrationCoefficients solve_coefficients(const LeverFit& fit_1, const LeverFit& fit_2) {
  for (const LeverFit* f : {&fit_1, &fit_2}) {
    if (!(f->slope_force > 0.0) || !(f->slope_torque_m > 0.0)) {
      throw Error(ErrorCategory::CalibrationInvalid, "fitted slopes must be positive");
    }
  }
  LeverGeometry g1{fit_1.slope_force, 0.3, fit_1.slope_torque_m / fit_1.slope_force, Lever::One};
  LeverGeometry g2{fit_2.slope_force, 0.3, fit_2.slope_torque_m / fit_2.slope_force, Lever::Two};
  return coefficients_from_geometry(g1, g2);
}

ArtifactSeries artifact_ratio(std::span<const double> t_s, std::span<const double> external_n,
                              std::span<const double> device_n, double guard_n) {
  if (external_n.size() != device_n.size() || t_s.size() != external_n.size()) {
    throw Error(ErrorCategory::LengthMismatch, "artifact series differ in length");
  }
  ArtifactSeries out;
  out.samples.reserve(external_n.size());
  for (std::size_t i = 0; i < external_n.size(); ++i) {
    ArtifactSample s{t_s[i], external_n[i], device_n[i], std::nullopt};
    if (external_n[i] >= guard_n) {
      s.a_tm = (external_n[i] - device_n[i]) / external_n[i];
      out.max_abs_a_tm = std::max(out.max_abs_a_tm, std::abs(*s.a_tm));
      ++out.defined_count;
    }
    out.samples.push_back(s);
  }
  return out;
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in, const std::string& source_name) {
  CsvReader reader(in, source_name);
  reader.expect_header({"t_s", "external_force_N", "f_m_N", "t_m_Nm", "lever_id"});
  SweepRecord one{Lever::One, {}};
  SweepRecord two{Lever::Two, {}};
  while (auto row = reader.next_row()) {
    if (row->size() != 5) {
      throw ParseError(source_name, reader.line(), 0, "expected 5 columns");
    }
    SweepSample s;
    s.reading.t_s = reader.parse_double(*row, 0);
    s.external_force_n = reader.parse_double(*row, 1);
    s.reading.f_m_n = reader.parse_double(*row, 2);
    s.reading.t_m_nm = reader.parse_double(*row, 3);
    const long lever = reader.parse_int(*row, 4);
    if (lever == 1) {
      one.samples.push_back(s);
    } else if (lever == 2) {
      two.samples.push_back(s);
    } else {
      throw ParseError(source_name, reader.line(), reader.column_of(*row, 4), "lever_id must be 1 or 2");
    }
  }
  std::vector<SweepRecord> out;
  if (!one.samples.empty()) out.push_back(std::move(one));
  if (!two.samples.empty()) out.push_back(std::move(two));
  return out;
}

std::vector<SweepRecord> read_sweep_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open " + path);
  return read_sweep_csv(in, path);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> sweeps) {
  out << "t_s,external_force_N,f_m_N,t_m_Nm,lever_id\n";
  for (const auto& sweep : sweeps) {
    for (const auto& s : sweep.samples) {
      out << format_fixed(s.reading.t_s, 3) << ',' << format_fixed(s.external_force_n, 6) << ','
          << format_fixed(s.reading.f_m_n, 6) << ',' << format_fixed(s.reading.t_m_nm, 9) << ','
          << static_cast<int>(sweep.lever) << '\n';
    }
  }
}

CalibrationReport calibrate(std::span<const SweepRecord> sweeps, const FitOptions& options) {
  const SweepRecord* one = nullptr;
  const SweepRecord* two = nullptr;
  for (const auto& s : sweeps) {
    (s.lever == Lever::One ? one : two) = &s;
  }
  if (one == nullptr || two == nullptr) {
    throw Error(ErrorCategory::InvalidArgument, "calibration needs sweeps for both levers");
  }
  CalibrationReport report;
  report.fit_1 = fit_lever(*one, options);
  report.fit_2 = fit_lever(*two, options);
  report.coefficients = solve_coefficients(report.fit_1, report.fit_2);
  return report;
}

}  // namespace gripkit
