#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "swsk/bus/link_fault.hpp"
#include "swsk/gateway/gateway.hpp"
#include "swsk/machine/controller.hpp"
#include "swsk/server/server.hpp"

namespace swsk::system {

// Link names used by scenarios and config:
//   "ble:<worker>"      device -> gateway radio hop
//   "gateway:<worker>"  gateway <-> broker
//   "server"            server <-> broker
//   "machine:<id>"      controller <-> broker
std::string ble_link(const std::string& worker_id);
std::string gateway_link(const std::string& worker_id);
std::string machine_link(const std::string& machine_id);
inline constexpr const char* kServerLink = "server";

// {"latency_ms", "jitter_ms", "drop_prob", "topic_drops": [{"filter", "drop_prob"}],
//  "partitions": [{"start_ms", "end_ms"}]}; members absent keep `base`.
bus::LinkFault link_fault_from_json(const nlohmann::json& j, const std::string& path, const bus::LinkFault& base = {});
nlohmann::json to_json(const bus::LinkFault& f);

struct SystemConfig {
  server::ServerConfig server;
  gateway::GatewayConfig gateway;  // worker_id/site_id filled per worker
  machine::ControllerConfig controller;
  bus::LinkFault default_link{10, 20};
  bus::LinkFault ble_link{5, 10};
  std::map<std::string, bus::LinkFault> links;  // per-link overrides by name

  /// Default link for `name` with any override applied.
  bus::LinkFault link(const std::string& name) const;
};

// {"site", "engine", "server", "gateway", "machine", "links": {"default", "ble", "<name>": ...}}.
/// Throws SchemaError.
SystemConfig system_config_from_json(const nlohmann::json& j, const std::string& path = "");
SystemConfig load_system_config(const std::string& file);
nlohmann::json to_json(const SystemConfig& c);

}  // namespace swsk::system
