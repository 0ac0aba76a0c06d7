#include "gripkit/profile.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>

#include "detail/file_util.hpp"
#include "detail/json_util.hpp"
#include "detail/profile_json.hpp"

namespace gripkit {

namespace {

using detail::field;
using detail::Json;

constexpr int kProfileFormat = 1;

Json fit_json(const LeverFit& f) {
  return {{"lever", static_cast<int>(f.lever)},
          {"slope_force", f.slope_force},
          {"slope_torque_m", f.slope_torque_m},
          {"intercept_force_n", f.intercept_force_n},
          {"intercept_torque_nm", f.intercept_torque_nm},
          {"r2_force", f.r2_force},
          {"r2_torque", f.r2_torque},
          {"warnings", f.warnings}};
}

LeverFit fit_from(const Json& j, const std::string& src) {
  LeverFit f;
  const int lever = field<int>(j, "lever", src);
  if (lever != 1 && lever != 2) throw ParseError(src, 0, 0, "lever must be 1 or 2");
  f.lever = static_cast<Lever>(lever);
  f.slope_force = field<double>(j, "slope_force", src);
  f.slope_torque_m = field<double>(j, "slope_torque_m", src);
  f.intercept_force_n = field<double>(j, "intercept_force_n", src);
  f.intercept_torque_nm = field<double>(j, "intercept_torque_nm", src);
  f.r2_force = field<double>(j, "r2_force", src);
  f.r2_torque = field<double>(j, "r2_torque", src);
  f.warnings = detail::field_or<std::vector<std::string>>(j, "warnings", {}, src);
  return f;
}

}  // namespace

namespace detail {

Json profile_json(const DeviceProfile& p) {
  const auto& c = p.coefficients;
  const auto& a = p.actuator;
  Json j = {
      {"calibrated_at", p.calibrated_at},
      {"source", p.source},
      {"coefficients",
       {{"alpha_1", c.alpha_1},
        {"alpha_2", c.alpha_2},
        {"beta_1_per_m", c.beta_1_per_m},
        {"beta_2_per_m", c.beta_2_per_m},
        {"d_1_m", c.d_1_m},
        {"d_2_m", c.d_2_m},
        {"ratio_1", c.ratio_1},
        {"ratio_2", c.ratio_2}}},
      {"actuator",
       {{"gear_ratio", a.gear_ratio},
        {"pitch_mm", a.pitch_mm},
        {"counts_per_output_rev", a.counts_per_output_rev},
        {"max_torque_nmm", a.max_torque_nmm},
        {"nominal_speed_rpm", a.nominal_speed_rpm},
        {"travel_range_mm", a.travel_range_mm},
        {"thrust_limit_n", a.thrust_limit_n},
        {"settle_band_counts", a.settle_band_counts},
        {"duty_max", a.duty_max},
        {"end_stop_margin_mm", a.end_stop_margin_mm},
        {"current_baseline_a", a.current_baseline_a},
        {"current_per_duty_a", a.current_per_duty_a},
        {"current_stall_a", a.current_stall_a}}},
  };
  if (p.fit_1) j["fit_1"] = fit_json(*p.fit_1);
  if (p.fit_2) j["fit_2"] = fit_json(*p.fit_2);
  return j;
}

DeviceProfile profile_from(const Json& j, const std::string& src) {
  DeviceProfile p;
  p.calibrated_at = detail::field_or<std::string>(j, "calibrated_at", "", src);
  p.source = detail::field_or<std::string>(j, "source", "", src);
  const Json c = field<Json>(j, "coefficients", src);
  auto& k = p.coefficients;
  k.alpha_1 = field<double>(c, "alpha_1", src);
  k.alpha_2 = field<double>(c, "alpha_2", src);
  k.beta_1_per_m = field<double>(c, "beta_1_per_m", src);
  k.beta_2_per_m = field<double>(c, "beta_2_per_m", src);
  k.d_1_m = field<double>(c, "d_1_m", src);
  k.d_2_m = field<double>(c, "d_2_m", src);
  k.ratio_1 = field<double>(c, "ratio_1", src);
  k.ratio_2 = field<double>(c, "ratio_2", src);
  if (j.contains("actuator")) {
    const Json a = field<Json>(j, "actuator", src);
    auto& s = p.actuator;
    s.gear_ratio = field<double>(a, "gear_ratio", src);
    s.pitch_mm = field<double>(a, "pitch_mm", src);
    s.counts_per_output_rev = field<double>(a, "counts_per_output_rev", src);
    s.max_torque_nmm = field<double>(a, "max_torque_nmm", src);
    s.nominal_speed_rpm = field<double>(a, "nominal_speed_rpm", src);
    s.travel_range_mm = field<double>(a, "travel_range_mm", src);
    s.thrust_limit_n = field<double>(a, "thrust_limit_n", src);
    s.settle_band_counts = field<double>(a, "settle_band_counts", src);
    s.duty_max = field<double>(a, "duty_max", src);
    s.end_stop_margin_mm = detail::field_or(a, "end_stop_margin_mm", s.end_stop_margin_mm, src);
    s.current_baseline_a = detail::field_or(a, "current_baseline_a", s.current_baseline_a, src);
    s.current_per_duty_a = detail::field_or(a, "current_per_duty_a", s.current_per_duty_a, src);
    s.current_stall_a = detail::field_or(a, "current_stall_a", s.current_stall_a, src);
  }
  if (j.contains("fit_1")) p.fit_1 = fit_from(j["fit_1"], src);
  if (j.contains("fit_2")) p.fit_2 = fit_from(j["fit_2"], src);
  p.coefficients.validate();
  return p;
}

}  // namespace detail

DeviceProfile DeviceProfile::reference() {
  DeviceProfile p;
  p.coefficients = coefficients_from_geometry(ReferenceDevice::lever_1(), ReferenceDevice::lever_2());
  p.source = "reference";
  p.calibrated_at = "1970-01-01T00:00:00Z";
  return p;
}

std::string profile_to_json(const DeviceProfile& profile) { return detail::profile_json(profile).dump(2) + "\n"; }

DeviceProfile profile_from_json(const std::string& text, const std::string& source_name) {
  const Json doc = detail::parse_json(text, source_name);
  // Accept a bare profile or a history document.
  if (doc.contains("history")) {
    const auto& h = doc["history"];
    if (!h.is_array() || h.empty()) throw ParseError(source_name, 0, 0, "profile history is empty");
    return detail::profile_from(h.back(), source_name);
  }
  return detail::profile_from(doc, source_name);
}

void save_profile(const std::string& path, const DeviceProfile& profile) {
  Json history = Json::array();
  if (std::filesystem::exists(path)) {
    const Json doc = detail::parse_json(detail::read_text_file(path), path);
    if (doc.contains("history") && doc["history"].is_array()) {
      history = doc["history"];
    } else if (doc.contains("coefficients")) {
      history.push_back(doc);
    }
  }
  history.push_back(detail::profile_json(profile));
  const Json doc = {{"format_version", kProfileFormat}, {"history", history}};
  detail::write_file_atomic(path, doc.dump(2) + "\n");
}

DeviceProfile load_profile(const std::string& path) {
  return profile_from_json(detail::read_text_file(path), path);
}

std::size_t profile_history_size(const std::string& path) {
  const Json doc = detail::parse_json(detail::read_text_file(path), path);
  return doc.contains("history") ? doc["history"].size() : 1;
}

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gripkit
