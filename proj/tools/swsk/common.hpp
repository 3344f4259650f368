#pragma once

#include <optional>
#include <string>

#include "swsk/system/config.hpp"

namespace swsk::cli {

enum Exit : int { kOk = 0, kExpectationFailed = 1, kInputError = 2, kConnectivity = 3 };

// --config, else $SWSK_CONFIG, else built-in defaults. Throws SchemaError.
system::SystemConfig resolve_config(const std::optional<std::string>& path);

struct HostPort {
  std::string host;
  int port = 0;
};
/// "host:port" or ":port". Throws std::invalid_argument.
HostPort parse_host_port(const std::string& s, int default_port);

}  // namespace swsk::cli
