#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "swsk/core/time.hpp"
#include "swsk/engine/stress.hpp"
#include "swsk/engine/suitability.hpp"
#include "swsk/machine/controller.hpp"
#include "swsk/server/events.hpp"

namespace swsk::server {

class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct WorkerEntry {
  nlohmann::json meta = nlohmann::json::object();
  std::uint64_t session = 0;  // bumped on every (re-)registration
  VirtualMs session_started = 0;
  std::optional<VirtualMs> last_telemetry_ts;
  std::optional<std::uint64_t> last_gateway_seq;

  friend bool operator==(const WorkerEntry&, const WorkerEntry&) = default;
};

struct MachineStatus {
  machine::MachineMode mode = machine::MachineMode::Running;
  bool latched = false;
  std::string last_cause;
  VirtualMs updated_at = 0;

  friend bool operator==(const MachineStatus&, const MachineStatus&) = default;
};

struct MachineEntry {
  engine::RiskParams params;
  engine::RiskClass risk_class = engine::RiskClass::a;
  MachineStatus status;

  friend bool operator==(const MachineEntry&, const MachineEntry&) = default;
};

// Workers, machines and one-to-one assignments.
class Registry {
 public:
  void register_worker(const std::string& id, nlohmann::json meta, VirtualMs ts);
  void register_machine(const std::string& id, const engine::RiskParams& params);
  /// Replaces any previous assignment of either side.
  void assign(const std::string& worker_id, const std::string& machine_id);
  void unassign(const std::string& worker_id);

  /// Throws InvariantViolation.
  void check_invariants() const;

  const std::map<std::string, WorkerEntry>& workers() const { return workers_; }
  const std::map<std::string, MachineEntry>& machines() const { return machines_; }
  const std::map<std::string, std::string>& assignments() const { return assignments_; }
  std::optional<std::string> machine_of(const std::string& worker_id) const;
  std::optional<std::string> worker_on(const std::string& machine_id) const;

  WorkerEntry& worker(const std::string& id);
  MachineEntry& machine(const std::string& id);
  bool has_worker(const std::string& id) const { return workers_.contains(id); }
  bool has_machine(const std::string& id) const { return machines_.contains(id); }

  friend bool operator==(const Registry&, const Registry&) = default;

 private:
  std::map<std::string, WorkerEntry> workers_;
  std::map<std::string, MachineEntry> machines_;
  std::map<std::string, std::string> assignments_;  // worker -> machine
};

struct CommandEntry {
  std::string machine_id;
  std::string type;
  std::string source;
  VirtualMs issued_at = 0;
  std::optional<std::string> ack_status;
  bool escalated = false;

  friend bool operator==(const CommandEntry&, const CommandEntry&) = default;
};

// Everything the event log determines. The live server changes it only by
// applying the events it appends; replay applies the same events again.
struct ServerState {
  Registry registry;
  std::map<std::string, engine::StressAssessment> assessments;
  std::map<std::string, CommandEntry> commands;
  std::map<std::string, std::uint64_t> alert_counts;
  std::map<std::string, std::uint64_t> notification_counts;
  std::uint64_t last_event_seq = 0;
  std::uint64_t events = 0;

  /// Throws InvariantViolation or SchemaError on a payload that does not fit.
  void apply(const EventRecord& e);

  friend bool operator==(const ServerState&, const ServerState&) = default;
};

nlohmann::json to_json(const ServerState& s);
ServerState state_from_json(const nlohmann::json& j);
/// SHA-256 of the canonical JSON form.
std::string state_hash(const ServerState& s);

nlohmann::json risk_params_json(const engine::RiskParams& p);
engine::RiskParams risk_params_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace swsk::server
