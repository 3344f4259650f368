#include "swsk/machine/controller.hpp"

#include <algorithm>

#include "swsk/core/errors.hpp"
#include "swsk/core/json_reader.hpp"

namespace swsk::machine {

std::string_view to_string(MachineMode m) {
  switch (m) {
    case MachineMode::Running: return "RUNNING";
    case MachineMode::EmergencyStop: return "EMERGENCY_STOP";
    case MachineMode::SafeStop: return "SAFE_STOP";
  }
  return "RUNNING";
}

std::optional<MachineMode> parse_machine_mode(std::string_view s) {
  if (s == "RUNNING") return MachineMode::Running;
  if (s == "EMERGENCY_STOP") return MachineMode::EmergencyStop;
  if (s == "SAFE_STOP") return MachineMode::SafeStop;
  return std::nullopt;
}

std::string_view to_string(AckStatus s) {
  switch (s) {
    case AckStatus::Applied: return "applied";
    case AckStatus::Duplicate: return "duplicate";
    case AckStatus::Rejected: return "rejected";
    case AckStatus::Nack: return "nack";
  }
  return "nack";
}

std::optional<AckStatus> parse_ack_status(std::string_view s) {
  for (auto v : {AckStatus::Applied, AckStatus::Duplicate, AckStatus::Rejected, AckStatus::Nack}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

bool MachineState::seen(std::string_view cmd_id) const {
  return std::find(seen_cmd_ids.begin(), seen_cmd_ids.end(), cmd_id) != seen_cmd_ids.end();
}

MachineState initial_state(std::string machine_id, VirtualMs now, const ControllerConfig& config) {
  MachineState s;
  s.machine_id = std::move(machine_id);
  s.heartbeat_deadline = now + config.watchdog_ms;
  s.updated_at = now;
  return s;
}

HandleResult handle_command(const MachineState& state, const EstopCommand& cmd, VirtualMs now,
                            const ControllerConfig& config) {
  HandleResult r{state, Ack{cmd.cmd_id, AckStatus::Applied, {}}, false};
  if (state.seen(cmd.cmd_id)) {
    r.ack.status = AckStatus::Duplicate;
    return r;
  }
  auto& s = r.state;
  s.seen_cmd_ids.push_back(cmd.cmd_id);
  if (s.seen_cmd_ids.size() > config.seen_capacity) s.seen_cmd_ids.pop_front();

  auto reject = [&](std::string why) {
    r.ack.status = AckStatus::Rejected;
    r.ack.reason = std::move(why);
  };

  if (cmd.type == CommandType::Estop) {
    if (s.mode == MachineMode::EmergencyStop) return r;
    s.mode = MachineMode::EmergencyStop;
    s.latched = true;
    s.last_cause = std::string(engine::to_string(cmd.source)) + ": " + cmd.reason;
    s.updated_at = now;
    r.changed = true;
    return r;
  }
  if (cmd.source != CommandSource::Operator) {
    reject("RESET requires source operator");
  } else if (!s.latched) {
    reject("machine is not latched");
  } else if (now > s.heartbeat_deadline) {
    reject("no current server heartbeat");
  } else {
    s.mode = MachineMode::Running;
    s.latched = false;
    s.last_cause = "operator reset: " + cmd.reason;
    s.updated_at = now;
    r.changed = true;
  }
  return r;
}

HandleResult handle_payload(const MachineState& state, std::string_view payload, VirtualMs now,
                            const ControllerConfig& config) {
  std::string why;
  try {
    return handle_command(state, command_from_json(nlohmann::json::parse(payload)), now, config);
  } catch (const nlohmann::json::parse_error& e) {
    why = std::string("invalid JSON: ") + e.what();
  } catch (const SchemaError& e) {
    why = e.path() + ": " + e.what();
  }
  return HandleResult{state, Ack{std::nullopt, AckStatus::Nack, why}, false};
}

MachineState on_heartbeat(const MachineState& state, VirtualMs now, const ControllerConfig& config) {
  MachineState s = state;
  s.heartbeat_deadline = std::max(s.heartbeat_deadline, now + config.watchdog_ms);
  return s;
}

MachineState tick(const MachineState& state, VirtualMs now) {
  if (state.mode != MachineMode::Running || now <= state.heartbeat_deadline) return state;
  MachineState s = state;
  s.mode = MachineMode::SafeStop;
  s.latched = true;
  s.last_cause = std::string(kWatchdogCause);
  s.updated_at = now;
  return s;
}

nlohmann::json state_json(const MachineState& s, const std::optional<Ack>& ack) {
  nlohmann::json j = {{"machine_id", s.machine_id},
                      {"mode", to_string(s.mode)},
                      {"latched", s.latched},
                      {"last_cause", s.last_cause},
                      {"updated_at", s.updated_at},
                      {"ack_of", nullptr},
                      {"ack_status", nullptr},
                      {"ack_reason", nullptr}};
  if (ack) {
    if (ack->ack_of) j["ack_of"] = *ack->ack_of;
    j["ack_status"] = to_string(ack->status);
    if (!ack->reason.empty()) j["ack_reason"] = ack->reason;
  }
  return j;
}

PublishedState published_state_from_json(const nlohmann::json& j) {
  JsonReader r(j, "state");
  PublishedState p;
  p.machine_id = r.string("machine_id");
  auto mode = parse_machine_mode(r.string("mode"));
  if (!mode) r.fail("mode", "unknown machine mode");
  p.mode = *mode;
  p.latched = r.boolean("latched", false);
  p.last_cause = r.string("last_cause", "");
  p.updated_at = r.integer("updated_at", 0);
  if (r.has("ack_of")) p.ack_of = r.string("ack_of");
  if (r.has("ack_status")) {
    p.ack_status = parse_ack_status(r.string("ack_status"));
    if (!p.ack_status) r.fail("ack_status", "unknown ack status");
  }
  p.ack_reason = r.string("ack_reason", "");
  return p;
}

}  // namespace swsk::machine
