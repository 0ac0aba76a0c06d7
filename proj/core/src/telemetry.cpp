#include "gripkit/telemetry.hpp"

#include <cmath>

#include "detail/json_util.hpp"

namespace gripkit {

using detail::Json;

std::string_view participant_phase_name(ParticipantPhase p) noexcept {
  switch (p) {
    case ParticipantPhase::Reach: return "reach";
    case ParticipantPhase::Hold: return "hold";
    case ParticipantPhase::Release: return "release";
  }
  return "reach";
}

ParticipantPhase project_phase(TrialPhase p) noexcept {
  switch (p) {
    case TrialPhase::RampUp: return ParticipantPhase::Reach;
    case TrialPhase::StableGrip:
    case TrialPhase::Stimulus:
    case TrialPhase::Wait: return ParticipantPhase::Hold;
    case TrialPhase::Released: return ParticipantPhase::Release;
  }
  return ParticipantPhase::Reach;
}

ParticipantFrame project(const TelemetryFrame& f) noexcept {
  return {f.t_s, f.f_mean_n, project_phase(f.phase), f.target_n, f.band_n, f.trial_index, f.block_index,
          f.training};
}

std::string to_json_line(const TelemetryFrame& f) {
  const Json j = {{"type", "frame"},
                  {"t", f.t_s},
                  {"f_mean", f.f_mean_n},
                  {"phase", std::string(phase_name(f.phase))},
                  {"target", f.target_n},
                  {"band", f.band_n},
                  {"trial", f.trial_index},
                  {"block", f.block_index},
                  {"training", f.training},
                  {"f_grip_1", f.f_grip_1_n},
                  {"f_grip_2", f.f_grip_2_n},
                  {"tactor_x", f.tactor_x_mm}};
  return j.dump() + "\n";
}

std::string to_json_line(const ParticipantFrame& f) {
  const Json j = {{"type", "frame"},
                  {"t", f.t_s},
                  {"f_mean", f.f_mean_n},
                  {"phase", std::string(participant_phase_name(f.phase))},
                  {"target", f.target_n},
                  {"band", f.band_n},
                  {"trial", f.trial_index},
                  {"block", f.block_index},
                  {"training", f.training}};
  return j.dump() + "\n";
}

std::string status_line(std::string_view state, int trial_index) {
  const Json j = {{"type", "status"}, {"state", std::string(state)}, {"trial", trial_index}};
  return j.dump() + "\n";
}

std::optional<double> parse_grip_message(std::string_view text) {
  const Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto it = j.find("grip");
  if (it == j.end() || !it->is_number()) return std::nullopt;
  const double g = it->get<double>();
  if (!std::isfinite(g)) return std::nullopt;
  return g < 0.0 ? 0.0 : g;
}

}  // namespace gripkit
