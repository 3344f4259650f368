#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "swsk/core/time.hpp"
#include "swsk/machine/command.hpp"

namespace swsk::machine {

enum class MachineMode : std::uint8_t { Running, EmergencyStop, SafeStop };

std::string_view to_string(MachineMode m);
std::optional<MachineMode> parse_machine_mode(std::string_view s);

struct ControllerConfig {
  VirtualMs watchdog_ms = 3000;
  std::size_t seen_capacity = 256;
  VirtualMs tick_ms = 100;
};

inline constexpr std::string_view kWatchdogCause = "WATCHDOG";

struct MachineState {
  std::string machine_id;
  MachineMode mode = MachineMode::Running;
  bool latched = false;
  std::string last_cause;
  std::deque<std::string> seen_cmd_ids;  // oldest first, bounded
  VirtualMs heartbeat_deadline = 0;
  VirtualMs updated_at = 0;

  bool seen(std::string_view cmd_id) const;

  friend bool operator==(const MachineState&, const MachineState&) = default;
};

MachineState initial_state(std::string machine_id, VirtualMs now, const ControllerConfig& config = {});

enum class AckStatus : std::uint8_t { Applied, Duplicate, Rejected, Nack };

std::string_view to_string(AckStatus s);
std::optional<AckStatus> parse_ack_status(std::string_view s);

struct Ack {
  std::optional<std::string> ack_of;  // empty for a command that could not be parsed
  AckStatus status = AckStatus::Applied;
  std::string reason;
};

struct HandleResult {
  MachineState state;
  Ack ack;
  bool changed = false;  // mode or latch changed
};

// ESTOP latches EMERGENCY_STOP from any mode. RESET returns to RUNNING only
// from a latched mode, from an operator, and while the server heartbeat is
// current. A cmd_id already seen changes nothing and is acked as duplicate.
HandleResult handle_command(const MachineState& state, const EstopCommand& cmd, VirtualMs now,
                            const ControllerConfig& config = {});

/// Parses a raw payload; malformed input yields a NACK and no state change.
HandleResult handle_payload(const MachineState& state, std::string_view payload, VirtualMs now,
                            const ControllerConfig& config = {});

MachineState on_heartbeat(const MachineState& state, VirtualMs now, const ControllerConfig& config = {});

/// RUNNING past the heartbeat deadline becomes SAFE_STOP (cause WATCHDOG).
MachineState tick(const MachineState& state, VirtualMs now);

// Retained payload on .../machine/{id}/state:
// {machine_id, mode, latched, last_cause, updated_at, ack_of, ack_status, ack_reason}
nlohmann::json state_json(const MachineState& state, const std::optional<Ack>& ack = std::nullopt);

struct PublishedState {
  std::string machine_id;
  MachineMode mode = MachineMode::Running;
  bool latched = false;
  std::string last_cause;
  VirtualMs updated_at = 0;
  std::optional<std::string> ack_of;
  std::optional<AckStatus> ack_status;
  std::string ack_reason;
};

/// Throws SchemaError.
PublishedState published_state_from_json(const nlohmann::json& j);

}  // namespace swsk::machine
