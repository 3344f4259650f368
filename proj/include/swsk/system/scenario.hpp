#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swsk/device/scenario.hpp"
#include "swsk/engine/suitability.hpp"
#include "swsk/machine/controller.hpp"

namespace swsk::system {

struct WorkerSpec {
  std::string id;
  device::WorkerProfile profile;
  device::ScenarioScript script;
  std::optional<std::string> machine;
  nlohmann::json meta = nlohmann::json::object();
};

struct MachineSpec {
  std::string id;
  engine::RiskParams params;
};

enum class OperatorAction : std::uint8_t { Estop, Reset };

struct OperatorStep {
  VirtualMs at_ms = 0;
  OperatorAction action = OperatorAction::Estop;
  std::string machine_id;
  std::string reason;
};

struct ServerPause {
  VirtualMs at_ms = 0;
  VirtualMs duration_ms = 0;
};

// Checked against the finished run; every member is optional.
struct Expectations {
  std::optional<bool> estop_issued;
  std::optional<std::size_t> max_commands;
  std::optional<VirtualMs> estop_within_ms;         // every auto ESTOP: machine stop - trigger
  std::optional<VirtualMs> button_stop_within_ms;   // stop - device time of first button frame
  std::map<std::string, machine::MachineMode> final_modes;
  std::map<std::string, std::size_t> state_changes;  // exact count per machine
  std::vector<std::string> alerts_present;
  std::vector<std::string> alerts_absent;
  std::vector<std::string> notifications_present;
  std::vector<std::string> notifications_absent;

  bool empty() const;
};

struct SystemScenario {
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  double duration_s = 60.0;
  std::vector<WorkerSpec> workers;
  std::vector<MachineSpec> machines;
  std::map<std::string, nlohmann::json> links;  // per-link overrides, applied over the config
  std::vector<OperatorStep> operator_actions;
  std::vector<ServerPause> server_pauses;
  Expectations expect;

  /// Every link name the scenario may refer to.
  std::vector<std::string> link_names() const;
  /// Replaces the scenario seed and every worker's seed.
  void set_seed(std::uint64_t seed);
};

/// Throws SchemaError naming the offending member.
SystemScenario system_scenario_from_json(const nlohmann::json& j, const std::string& path = "");
SystemScenario load_system_scenario(const std::string& file);

}  // namespace swsk::system
