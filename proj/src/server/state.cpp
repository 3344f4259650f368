#include "swsk/server/state.hpp"

#include "swsk/core/errors.hpp"
#include "swsk/core/hash.hpp"
#include "swsk/core/json_reader.hpp"

namespace swsk::server {

using engine::RiskParams;

nlohmann::json risk_params_json(const RiskParams& p) {
  return {{"S", telemetry::to_string(p.severity)},
          {"F", telemetry::to_string(p.frequency)},
          {"P", telemetry::to_string(p.avoidance)}};
}

RiskParams risk_params_from_json(const nlohmann::json& j, const std::string& path) {
  JsonReader r(j, path);
  r.only({"S", "F", "P"});
  auto s = telemetry::parse_severity(r.string("S"));
  if (!s) r.fail("S", "expected S1 or S2");
  auto f = telemetry::parse_frequency(r.string("F"));
  if (!f) r.fail("F", "expected F1 or F2");
  auto p = telemetry::parse_avoidance(r.string("P"));
  if (!p) r.fail("P", "expected P1 or P2");
  return RiskParams{*s, *f, *p};
}

void Registry::register_worker(const std::string& id, nlohmann::json meta, VirtualMs ts) {
  auto& w = workers_[id];
  w.meta = std::move(meta);
  ++w.session;
  w.session_started = ts;
  w.last_telemetry_ts.reset();
  w.last_gateway_seq.reset();
}

void Registry::register_machine(const std::string& id, const RiskParams& params) {
  auto& m = machines_[id];
  m.params = params;
  m.risk_class = engine::classify_risk(params);
}

void Registry::assign(const std::string& worker_id, const std::string& machine_id) {
  if (!has_worker(worker_id)) throw InvariantViolation("assign: unknown worker " + worker_id);
  if (!has_machine(machine_id)) throw InvariantViolation("assign: unknown machine " + machine_id);
  if (auto prev = worker_on(machine_id)) assignments_.erase(*prev);
  assignments_[worker_id] = machine_id;
}

void Registry::unassign(const std::string& worker_id) { assignments_.erase(worker_id); }

std::optional<std::string> Registry::machine_of(const std::string& worker_id) const {
  auto it = assignments_.find(worker_id);
  if (it == assignments_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Registry::worker_on(const std::string& machine_id) const {
  for (const auto& [w, m] : assignments_) {
    if (m == machine_id) return w;
  }
  return std::nullopt;
}

WorkerEntry& Registry::worker(const std::string& id) {
  auto it = workers_.find(id);
  if (it == workers_.end()) throw NotFound("unknown worker '" + id + "'");
  return it->second;
}

MachineEntry& Registry::machine(const std::string& id) {
  auto it = machines_.find(id);
  if (it == machines_.end()) throw NotFound("unknown machine '" + id + "'");
  return it->second;
}

void Registry::check_invariants() const {
  std::map<std::string, std::string> reverse;
  for (const auto& [w, m] : assignments_) {
    if (!workers_.contains(w)) throw InvariantViolation("assignment names unknown worker " + w);
    if (!machines_.contains(m)) throw InvariantViolation("assignment names unknown machine " + m);
    if (!reverse.emplace(m, w).second) throw InvariantViolation("machine " + m + " assigned twice");
  }
  for (const auto& [id, m] : machines_) {
    if (m.risk_class != engine::classify_risk(m.params)) {
      throw InvariantViolation("machine " + id + " risk class does not match its parameters");
    }
  }
}

void ServerState::apply(const EventRecord& e) {
  const auto& p = e.payload;
  const std::string path = "event[" + std::to_string(e.event_seq) + "].payload";
  JsonReader r(p, path);
  switch (e.kind) {
    case EventKind::RegistryChange: {
      const auto op = r.string("op");
      if (op == "register_worker") {
        registry.register_worker(r.string("worker_id"), p.value("meta", nlohmann::json::object()), e.ts);
        assessments.erase(r.string("worker_id"));
      } else if (op == "register_machine") {
        registry.register_machine(r.string("machine_id"), risk_params_from_json(p.at("params"), path + ".params"));
      } else if (op == "assign") {
        registry.assign(r.string("worker_id"), r.string("machine_id"));
      } else if (op == "unassign") {
        registry.unassign(r.string("worker_id"));
      } else {
        r.fail("op", "unknown registry operation");
      }
      registry.check_invariants();
      break;
    }
    case EventKind::Telemetry: {
      auto& w = registry.worker(r.string("worker_id"));
      w.last_telemetry_ts = r.integer("recv_ts");
      w.last_gateway_seq = r.unsigned_integer("gateway_seq", 0);
      break;
    }
    case EventKind::Alert:
      ++alert_counts[r.string("code")];
      break;
    case EventKind::Assessment:
      assessments[r.string("worker_id")] = engine::stress_from_json(p.at("assessment"));
      break;
    case EventKind::CommandIssued: {
      CommandEntry c;
      c.machine_id = r.string("machine_id");
      c.type = r.string("type");
      c.source = r.string("source");
      c.issued_at = r.integer("issued_at");
      commands[r.string("cmd_id")] = c;
      break;
    }
    case EventKind::CommandAcked: {
      auto it = commands.find(r.string("cmd_id"));
      if (it == commands.end()) r.fail("cmd_id", "acknowledges an unknown command");
      it->second.ack_status = r.string("status");
      break;
    }
    case EventKind::StateChange: {
      auto& m = registry.machine(r.string("machine_id"));
      auto mode = machine::parse_machine_mode(r.string("to"));
      if (!mode) r.fail("to", "unknown machine mode");
      m.status = MachineStatus{*mode, r.boolean("latched", false), r.string("last_cause", ""), r.integer("updated_at", e.ts)};
      break;
    }
    case EventKind::Notification: {
      const auto code = r.string("code");
      ++notification_counts[code];
      if (r.has("cmd_id")) {
        auto it = commands.find(r.string("cmd_id"));
        if (it != commands.end()) it->second.escalated = true;
      }
      break;
    }
  }
  last_event_seq = e.event_seq;
  ++events;
}

namespace {

nlohmann::json opt(const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const ServerState& s) {
  nlohmann::json workers = nlohmann::json::object();
  for (const auto& [id, w] : s.registry.workers()) {
    workers[id] = {{"meta", w.meta},
                   {"session", w.session},
                   {"session_started", w.session_started},
                   {"last_telemetry_ts", opt(w.last_telemetry_ts)},
                   {"last_gateway_seq", opt(w.last_gateway_seq)}};
  }
  nlohmann::json machines = nlohmann::json::object();
  for (const auto& [id, m] : s.registry.machines()) {
    machines[id] = {{"params", risk_params_json(m.params)},
                    {"risk_class", telemetry::to_string(m.risk_class)},
                    {"mode", machine::to_string(m.status.mode)},
                    {"latched", m.status.latched},
                    {"last_cause", m.status.last_cause},
                    {"updated_at", m.status.updated_at}};
  }
  nlohmann::json assessments = nlohmann::json::object();
  for (const auto& [id, a] : s.assessments) assessments[id] = engine::to_json(a);
  nlohmann::json commands = nlohmann::json::object();
  for (const auto& [id, c] : s.commands) {
    commands[id] = {{"machine_id", c.machine_id}, {"type", c.type},           {"source", c.source},
                    {"issued_at", c.issued_at},   {"ack_status", opt(c.ack_status)}, {"escalated", c.escalated}};
  }
  return {{"workers", workers},
          {"machines", machines},
          {"assignments", s.registry.assignments()},
          {"assessments", assessments},
          {"commands", commands},
          {"alert_counts", s.alert_counts},
          {"notification_counts", s.notification_counts},
          {"last_event_seq", s.last_event_seq},
          {"events", s.events}};
}

ServerState state_from_json(const nlohmann::json& j) {
  ServerState s;
  JsonReader r(j, "state");
  for (const auto& [id, w] : r.raw().at("workers").items()) {
    JsonReader wr(w, "state.workers." + id);
    s.registry.register_worker(id, w.at("meta"), wr.integer("session_started"));
    auto& e = s.registry.worker(id);
    e.session = wr.unsigned_integer("session", 0);
    if (wr.has("last_telemetry_ts")) e.last_telemetry_ts = wr.integer("last_telemetry_ts");
    if (wr.has("last_gateway_seq")) e.last_gateway_seq = wr.unsigned_integer("last_gateway_seq", 0);
  }
  for (const auto& [id, m] : r.raw().at("machines").items()) {
    JsonReader mr(m, "state.machines." + id);
    s.registry.register_machine(id, risk_params_from_json(m.at("params"), mr.child_path("params")));
    auto mode = machine::parse_machine_mode(mr.string("mode"));
    if (!mode) mr.fail("mode", "unknown machine mode");
    s.registry.machine(id).status = MachineStatus{*mode, mr.boolean("latched", false), mr.string("last_cause", ""),
                                                  mr.integer("updated_at", 0)};
  }
  for (const auto& [w, m] : r.raw().at("assignments").items()) s.registry.assign(w, m.get<std::string>());
  for (const auto& [id, a] : r.raw().at("assessments").items()) s.assessments[id] = engine::stress_from_json(a);
  for (const auto& [id, c] : r.raw().at("commands").items()) {
    JsonReader cr(c, "state.commands." + id);
    CommandEntry e{cr.string("machine_id"), cr.string("type"), cr.string("source"), cr.integer("issued_at"),
                   std::nullopt, cr.boolean("escalated", false)};
    if (cr.has("ack_status")) e.ack_status = cr.string("ack_status");
    s.commands[id] = e;
  }
  s.alert_counts = r.raw().at("alert_counts").get<std::map<std::string, std::uint64_t>>();
  s.notification_counts = r.raw().at("notification_counts").get<std::map<std::string, std::uint64_t>>();
  s.last_event_seq = r.unsigned_integer("last_event_seq", 0);
  s.events = r.unsigned_integer("events", 0);
  s.registry.check_invariants();
  return s;
}

std::string state_hash(const ServerState& s) { return sha256_hex(to_json(s).dump()); }

}  // namespace swsk::server
