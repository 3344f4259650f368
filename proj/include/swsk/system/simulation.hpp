#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swsk/server/state.hpp"
#include "swsk/system/config.hpp"
#include "swsk/system/scenario.hpp"

namespace swsk::system {

struct CommandRecord {
  std::string cmd_id;
  std::string machine_id;
  std::string type;
  std::string source;
  std::optional<std::string> worker_id;
  VirtualMs issued_at = 0;
  std::optional<VirtualMs> trigger_ts;
  std::optional<VirtualMs> stop_ts;  // controller's updated_at from the confirming state
  std::optional<VirtualMs> latency_ms;
  std::optional<std::string> ack_status;
  bool escalated = false;
};

struct MachineFinal {
  std::string mode;
  bool latched = false;
  std::string last_cause;
  std::size_t state_changes = 0;  // STATE_CHANGE events in the server log
  std::size_t transitions = 0;    // mode changes inside the controller
  std::string server_view;        // mode the server registry ends with
};

struct ExpectationResult {
  std::string name;
  nlohmann::json expected;
  nlohmann::json actual;
  bool pass = false;
};

struct SimReport {
  std::string scenario;
  std::uint64_t seed = 0;
  double duration_s = 0;
  VirtualMs end_ts = 0;
  std::map<std::string, std::uint64_t> alert_counts;
  std::map<std::string, std::uint64_t> notification_counts;
  std::vector<CommandRecord> commands;
  std::map<std::string, MachineFinal> machines;
  std::map<std::string, VirtualMs> first_button_frame;  // worker -> device time
  std::string event_log_path;
  std::string event_log_sha256;
  std::uint64_t events = 0;
  std::string state_hash;
  nlohmann::json stats;
  std::vector<ExpectationResult> expectations;
  bool pass = true;
};

nlohmann::json to_json(const SimReport& r);
std::string format_human(const SimReport& r);

struct SimOptions {
  std::optional<std::filesystem::path> out_dir;  // events.jsonl, snapshot.json, report.json
  std::optional<std::uint64_t> seed;
  bool keep_records = true;  // return the records in SimRun::events
};

struct SimRun {
  SimReport report;
  server::ServerState final_state;
  std::vector<server::EventRecord> events;  // empty unless keep_records
};

/// Runs the whole system under the virtual clock. Deterministic for fixed
/// (scenario, seed, config).
SimRun run_simulation(SystemScenario scenario, const SystemConfig& config, const SimOptions& options = {});

}  // namespace swsk::system
