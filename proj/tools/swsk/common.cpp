#include "common.hpp"

#include <cstdlib>
#include <stdexcept>

namespace swsk::cli {

system::SystemConfig resolve_config(const std::optional<std::string>& path) {
  if (path) return system::load_system_config(*path);
  if (const char* env = std::getenv("SWSK_CONFIG"); env != nullptr && *env != '\0') {
    return system::load_system_config(env);
  }
  return {};
}

HostPort parse_host_port(const std::string& s, int default_port) {
  HostPort hp;
  const auto colon = s.rfind(':');
  hp.host = colon == std::string::npos ? s : s.substr(0, colon);
  if (hp.host.empty()) hp.host = "127.0.0.1";
  hp.port = default_port;
  if (colon != std::string::npos) {
    const auto p = s.substr(colon + 1);
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(p, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != p.size() || v < 0 || v > 65535) throw std::invalid_argument("bad port in '" + s + "'");
    hp.port = v;
  }
  return hp;
}

}  // namespace swsk::cli
