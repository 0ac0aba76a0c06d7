#pragma once

#include "detail/json_util.hpp"
#include "gripkit/profile.hpp"

namespace gripkit::detail {

Json profile_json(const DeviceProfile& p);
DeviceProfile profile_from(const Json& j, const std::string& source);

}  // namespace gripkit::detail
