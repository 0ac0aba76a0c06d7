#pragma once

#include <optional>
#include <string>

#include "gripkit/actuator.hpp"
#include "gripkit/calibration.hpp"
#include "gripkit/mechanics.hpp"

namespace gripkit {

/// Everything the runtime needs to know about one physical (or simulated)
/// device: decomposition coefficients and the actuator constants.
struct DeviceProfile {
  CalibrationCoefficients coefficients;
  ActuatorSpec actuator;
  std::optional<LeverFit> fit_1;
  std::optional<LeverFit> fit_2;
  std::string calibrated_at;   ///< ISO 8601 UTC
  std::string source;          ///< sweep file or "reference"

  /// Reference geometry, no fits.
  static DeviceProfile reference();
};

std::string profile_to_json(const DeviceProfile& profile);
DeviceProfile profile_from_json(const std::string& text, const std::string& source_name);

/// Profile files keep every calibration; the newest entry is current.
/// Saving appends to the history of an existing file.
void save_profile(const std::string& path, const DeviceProfile& profile);
DeviceProfile load_profile(const std::string& path);
std::size_t profile_history_size(const std::string& path);

std::string utc_timestamp_now();

}  // namespace gripkit
