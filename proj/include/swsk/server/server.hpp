#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swsk/bus/transport.hpp"
#include "swsk/core/random.hpp"
#include "swsk/engine/config.hpp"
#include "swsk/engine/planner.hpp"
#include "swsk/engine/session.hpp"
#include "swsk/engine/suitability.hpp"
#include "swsk/machine/command.hpp"
#include "swsk/machine/controller.hpp"
#include "swsk/server/event_log.hpp"
#include "swsk/sim/scheduler.hpp"

namespace swsk::server {

struct ServerConfig {
  std::string site = "plant";
  engine::EngineConfig engine;
  VirtualMs heartbeat_ms = 1000;
  VirtualMs confirm_timeout_ms = 5000;
  std::uint64_t seed = 0;               // command id stream
  std::size_t history_capacity = 3600;  // telemetry samples kept per worker for queries
};

/// Throws SchemaError.
ServerConfig server_config_from_json(const nlohmann::json& j, const std::string& path = "server");

struct ServerCounters {
  std::uint64_t telemetry_accepted = 0;
  std::uint64_t telemetry_duplicates = 0;
  std::uint64_t telemetry_malformed = 0;
  std::uint64_t telemetry_quarantined = 0;
  std::uint64_t states_ignored = 0;
  std::uint64_t heartbeats_sent = 0;
};

struct InFlight {
  std::string machine_id;
  machine::CommandType type = machine::CommandType::Estop;
  VirtualMs issued_at = 0;
  std::optional<VirtualMs> trigger_ts;
};

struct SuitabilityQuery {
  std::optional<std::string> worker_id;
  std::optional<engine::StressLevel> stress_level;
  std::optional<std::string> machine_id;
  std::optional<engine::RiskClass> risk_class;
};

// Central service. Single-threaded: every entry point must be called from
// the thread that drives the scheduler (or under the lock that guards it).
class SafetyServer {
 public:
  using Listener = std::function<void(const EventRecord&)>;

  SafetyServer(ServerConfig config, bus::Transport& transport, sim::Scheduler& scheduler, EventLog& log,
               std::unique_ptr<engine::DecisionPolicy> policy = std::make_unique<engine::RuleBasedPolicy>());

  /// Subscribes to telemetry and machine state, starts the heartbeat.
  void start();

  void register_worker(const std::string& worker_id, nlohmann::json meta = nlohmann::json::object());
  void register_machine(const std::string& machine_id, const engine::RiskParams& params);
  /// Throws NotFound.
  void assign(const std::string& worker_id, const std::string& machine_id);
  void unassign(const std::string& worker_id);

  /// Throws NotFound for an unknown machine.
  std::string issue_estop(const std::string& machine_id, engine::CommandSource source, const std::string& reason,
                          const std::optional<std::string>& worker_id = std::nullopt,
                          std::optional<VirtualMs> trigger_ts = std::nullopt);
  /// Operator RESET. Throws NotFound.
  std::string issue_reset(const std::string& machine_id, const std::string& reason);

  /// Simulates a stalled server: no heartbeats, incoming messages held until resumed.
  void pause_for(VirtualMs duration);
  bool paused() const { return scheduler_.now() < paused_until_; }

  /// Throws NotFound or std::invalid_argument.
  engine::SuitabilityVerdict suitability(const SuitabilityQuery& q) const;

  void add_listener(Listener l) { listeners_.push_back(std::move(l)); }

  const ServerState& state() const { return log_.state(); }
  const EventLog& log() const { return log_; }
  const ServerConfig& config() const { return config_; }
  const ServerCounters& counters() const { return counters_; }
  const std::map<std::string, InFlight>& in_flight() const { return in_flight_; }
  /// Last state published by machines that are not in the registry.
  const std::map<std::string, machine::PublishedState>& unregistered_machines() const { return unregistered_; }
  const engine::WorkerSession* session(const std::string& worker_id) const;
  /// Telemetry payloads with recv_ts in [from, to].
  std::vector<nlohmann::json> history(const std::string& worker_id, VirtualMs from, VirtualMs to) const;
  VirtualMs now() const { return scheduler_.now(); }

 private:
  void on_telemetry(const bus::Delivery& d);
  void on_state(const bus::Delivery& d);
  void when_running(std::function<void()> fn);
  const EventRecord& emit(EventKind kind, nlohmann::json payload);
  void notify(const std::string& worker_id, engine::AlertSeverity sev, const std::string& code, const std::string& text,
              nlohmann::json extra = nlohmann::json::object());
  std::string dispatch(const std::string& machine_id, machine::CommandType type, engine::CommandSource source,
                       const std::string& reason, const std::optional<std::string>& worker_id,
                       std::optional<VirtualMs> trigger_ts);
  void heartbeat();

  ServerConfig config_;
  bus::Transport& transport_;
  sim::Scheduler& scheduler_;
  EventLog& log_;
  std::unique_ptr<engine::DecisionPolicy> policy_;
  Rng rng_;
  std::map<std::string, engine::WorkerSession> sessions_;
  std::map<std::string, std::deque<nlohmann::json>> history_;
  std::map<std::string, InFlight> in_flight_;
  std::map<std::string, machine::PublishedState> unregistered_;
  std::vector<Listener> listeners_;
  ServerCounters counters_;
  VirtualMs paused_until_ = 0;
  bool resume_scheduled_ = false;
  std::vector<std::function<void()>> held_;
  std::uint64_t heartbeat_seq_ = 0;
};

}  // namespace swsk::server
