#include "swsk/server/server.hpp"

#include "swsk/bus/topic.hpp"
#include "swsk/core/errors.hpp"
#include "swsk/core/json_reader.hpp"

namespace swsk::server {

using engine::AlertSeverity;
using machine::CommandType;

ServerConfig server_config_from_json(const nlohmann::json& j, const std::string& path) {
  JsonReader r(j, path);
  r.only({"site", "heartbeat_ms", "confirm_timeout_ms", "seed", "history_capacity"});
  ServerConfig c;
  c.site = r.string("site", c.site);
  c.heartbeat_ms = r.integer("heartbeat_ms", c.heartbeat_ms);
  c.confirm_timeout_ms = r.integer("confirm_timeout_ms", c.confirm_timeout_ms);
  c.seed = r.unsigned_integer("seed", c.seed);
  c.history_capacity = r.unsigned_integer("history_capacity", c.history_capacity);
  if (!bus::is_valid_topic(c.site) || c.site.find('/') != std::string::npos) r.fail("site", "not a single topic level");
  if (c.heartbeat_ms <= 0) r.fail("heartbeat_ms", "must be > 0");
  if (c.confirm_timeout_ms <= 0) r.fail("confirm_timeout_ms", "must be > 0");
  return c;
}

SafetyServer::SafetyServer(ServerConfig config, bus::Transport& transport, sim::Scheduler& scheduler, EventLog& log,
                           std::unique_ptr<engine::DecisionPolicy> policy)
    : config_(std::move(config)),
      transport_(transport),
      scheduler_(scheduler),
      log_(log),
      policy_(std::move(policy)),
      rng_(config_.seed ^ 0x5a5a5a5a5a5a5a5aULL) {}

void SafetyServer::start() {
  transport_.subscribe(bus::topics::all_telemetry(config_.site), bus::QoS::AtLeastOnce,
                       [this](const bus::Delivery& d) { when_running([this, d] { on_telemetry(d); }); });
  transport_.subscribe(bus::topics::all_states(config_.site), bus::QoS::AtLeastOnce,
                       [this](const bus::Delivery& d) { when_running([this, d] { on_state(d); }); });
  scheduler_.schedule_at(scheduler_.now(), [this] { heartbeat(); });
}

const EventRecord& SafetyServer::emit(EventKind kind, nlohmann::json payload) {
  const auto& e = log_.append(scheduler_.now(), kind, std::move(payload));
  for (const auto& l : listeners_) l(e);
  return e;
}

void SafetyServer::notify(const std::string& worker_id, AlertSeverity sev, const std::string& code,
                          const std::string& text, nlohmann::json extra) {
  auto j = engine::to_json(engine::Notification{worker_id, sev, code, text, scheduler_.now()});
  j.update(extra);
  emit(EventKind::Notification, std::move(j));
}

void SafetyServer::register_worker(const std::string& worker_id, nlohmann::json meta) {
  if (!bus::is_valid_topic(worker_id) || worker_id.find('/') != std::string::npos) {
    throw std::invalid_argument("invalid worker id '" + worker_id + "'");
  }
  emit(EventKind::RegistryChange, {{"op", "register_worker"}, {"worker_id", worker_id}, {"meta", std::move(meta)}});
  sessions_.insert_or_assign(worker_id, engine::WorkerSession(config_.engine, worker_id, scheduler_.now()));
  history_.erase(worker_id);
  policy_->reset(worker_id);
}

void SafetyServer::register_machine(const std::string& machine_id, const engine::RiskParams& params) {
  if (!bus::is_valid_topic(machine_id) || machine_id.find('/') != std::string::npos) {
    throw std::invalid_argument("invalid machine id '" + machine_id + "'");
  }
  emit(EventKind::RegistryChange,
       {{"op", "register_machine"}, {"machine_id", machine_id}, {"params", risk_params_json(params)}});
  unregistered_.erase(machine_id);
}

void SafetyServer::assign(const std::string& worker_id, const std::string& machine_id) {
  if (!state().registry.has_worker(worker_id)) throw NotFound("unknown worker '" + worker_id + "'");
  if (!state().registry.has_machine(machine_id)) throw NotFound("unknown machine '" + machine_id + "'");
  emit(EventKind::RegistryChange, {{"op", "assign"}, {"worker_id", worker_id}, {"machine_id", machine_id}});
}

void SafetyServer::unassign(const std::string& worker_id) {
  if (!state().registry.has_worker(worker_id)) throw NotFound("unknown worker '" + worker_id + "'");
  emit(EventKind::RegistryChange, {{"op", "unassign"}, {"worker_id", worker_id}});
}

std::string SafetyServer::issue_estop(const std::string& machine_id, engine::CommandSource source,
                                      const std::string& reason, const std::optional<std::string>& worker_id,
                                      std::optional<VirtualMs> trigger_ts) {
  return dispatch(machine_id, CommandType::Estop, source, reason, worker_id, trigger_ts);
}

std::string SafetyServer::issue_reset(const std::string& machine_id, const std::string& reason) {
  return dispatch(machine_id, CommandType::Reset, engine::CommandSource::Operator, reason, std::nullopt, std::nullopt);
}

std::string SafetyServer::dispatch(const std::string& machine_id, CommandType type, engine::CommandSource source,
                                   const std::string& reason, const std::optional<std::string>& worker_id,
                                   std::optional<VirtualMs> trigger_ts) {
  if (!state().registry.has_machine(machine_id)) throw NotFound("unknown machine '" + machine_id + "'");
  const machine::EstopCommand cmd{machine::make_cmd_id(rng_), type, scheduler_.now(), reason, source};

  nlohmann::json payload = {{"cmd_id", cmd.cmd_id},
                            {"machine_id", machine_id},
                            {"type", machine::to_string(type)},
                            {"source", engine::to_string(source)},
                            {"reason", reason},
                            {"issued_at", cmd.issued_at},
                            {"worker_id", worker_id ? nlohmann::json(*worker_id) : nlohmann::json(nullptr)},
                            {"trigger_ts", trigger_ts ? nlohmann::json(*trigger_ts) : nlohmann::json(nullptr)}};
  emit(EventKind::CommandIssued, std::move(payload));
  in_flight_[cmd.cmd_id] = InFlight{machine_id, type, cmd.issued_at, trigger_ts};
  transport_.publish(bus::topics::command(config_.site, machine_id), machine::to_json(cmd).dump(),
                     bus::QoS::AtLeastOnce, false);

  scheduler_.schedule_after(config_.confirm_timeout_ms, [this, id = cmd.cmd_id, machine_id] {
    if (!in_flight_.contains(id)) return;
    notify(state().registry.worker_on(machine_id).value_or(""), AlertSeverity::Critical, "COMMAND_UNCONFIRMED",
           std::string(machine::to_string(in_flight_.at(id).type)) + " to " + machine_id + " unconfirmed after " +
               std::to_string(config_.confirm_timeout_ms) + " ms",
           {{"cmd_id", id}, {"machine_id", machine_id}});
  });
  return cmd.cmd_id;
}

void SafetyServer::when_running(std::function<void()> fn) {
  if (!paused()) {
    fn();
    return;
  }
  held_.push_back(std::move(fn));
  if (resume_scheduled_) return;
  resume_scheduled_ = true;
  scheduler_.schedule_at(paused_until_, [this] {
    resume_scheduled_ = false;
    auto held = std::move(held_);
    held_.clear();
    for (auto& f : held) f();
  });
}

void SafetyServer::pause_for(VirtualMs duration) { paused_until_ = std::max(paused_until_, scheduler_.now() + duration); }

void SafetyServer::heartbeat() {
  if (!paused()) {
    ++counters_.heartbeats_sent;
    transport_.publish(bus::topics::heartbeat(config_.site),
                       nlohmann::json{{"ts", scheduler_.now()}, {"seq", heartbeat_seq_++}}.dump(), bus::QoS::AtMostOnce,
                       false);
  }
  scheduler_.schedule_after(config_.heartbeat_ms, [this] { heartbeat(); });
}

void SafetyServer::on_telemetry(const bus::Delivery& d) {
  telemetry::WorkerTelemetry t;
  try {
    t = telemetry::telemetry_from_json(nlohmann::json::parse(d.payload));
  } catch (const std::exception& e) {
    ++counters_.telemetry_malformed;
    notify("", AlertSeverity::Warn, "MALFORMED_TELEMETRY", e.what(), {{"topic", d.topic}});
    return;
  }
  if (t.site_id != config_.site || bus::topics::entity_id(d.topic) != t.worker_id) {
    ++counters_.telemetry_malformed;
    notify(t.worker_id, AlertSeverity::Warn, "MALFORMED_TELEMETRY", "payload identity does not match topic",
           {{"topic", d.topic}});
    return;
  }
  auto session = sessions_.find(t.worker_id);
  if (session == sessions_.end()) {
    ++counters_.telemetry_quarantined;
    notify(t.worker_id, AlertSeverity::Warn, "UNKNOWN_WORKER", "telemetry from unregistered worker quarantined",
           {{"topic", d.topic}});
    return;
  }
  const auto& entry = state().registry.workers().at(t.worker_id);
  if (entry.last_gateway_seq && t.gateway_seq <= *entry.last_gateway_seq) {
    ++counters_.telemetry_duplicates;
    return;
  }
  ++counters_.telemetry_accepted;
  // Receive time is the server's clock, not the gateway's.
  const VirtualMs gateway_ts = t.recv_ts;
  t.recv_ts = scheduler_.now();
  auto payload = telemetry::to_json(t);
  payload["gateway_ts"] = gateway_ts;
  emit(EventKind::Telemetry, payload);
  auto& hist = history_[t.worker_id];
  hist.push_back(std::move(payload));
  if (hist.size() > config_.history_capacity) hist.pop_front();

  const auto update = session->second.ingest(t);
  for (const auto& a : update.onsets) emit(EventKind::Alert, engine::to_json(a));
  if (update.assessment) {
    emit(EventKind::Assessment, {{"worker_id", t.worker_id}, {"assessment", engine::to_json(*update.assessment)}});
  }
  const engine::PolicyInput input{t.worker_id,
                                  scheduler_.now(),
                                  update.onsets,
                                  update.assessment ? &*update.assessment : nullptr,
                                  state().registry.machine_of(t.worker_id),
                                  session->second.critical_active()};
  const auto plan = policy_->decide(input);
  for (const auto& n : plan.notifications) notify(n.worker_id, n.severity, n.code, n.text);
  for (const auto& c : plan.commands) issue_estop(c.machine_id, c.source, c.reason, c.worker_id, scheduler_.now());
}

void SafetyServer::on_state(const bus::Delivery& d) {
  machine::PublishedState s;
  try {
    s = machine::published_state_from_json(nlohmann::json::parse(d.payload));
  } catch (const std::exception&) {
    ++counters_.states_ignored;
    return;
  }
  if (!state().registry.has_machine(s.machine_id)) {
    ++counters_.states_ignored;
    unregistered_[s.machine_id] = s;
    return;
  }
  const auto& known = state().registry.machines().at(s.machine_id).status;
  if (s.mode != known.mode) {
    emit(EventKind::StateChange, {{"machine_id", s.machine_id},
                                  {"from", machine::to_string(known.mode)},
                                  {"to", machine::to_string(s.mode)},
                                  {"latched", s.latched},
                                  {"last_cause", s.last_cause},
                                  {"updated_at", s.updated_at}});
  }
  if (!s.ack_of) return;
  auto it = in_flight_.find(*s.ack_of);
  if (it == in_flight_.end() || it->second.machine_id != s.machine_id) return;
  const auto& f = it->second;
  // An ESTOP counts as confirmed only once the controller reports the latched stop.
  if (f.type == CommandType::Estop && s.mode != machine::MachineMode::EmergencyStop) return;
  nlohmann::json payload = {{"cmd_id", *s.ack_of},
                            {"machine_id", s.machine_id},
                            {"status", s.ack_status ? machine::to_string(*s.ack_status) : "applied"},
                            {"mode", machine::to_string(s.mode)},
                            {"machine_updated_at", s.updated_at},
                            {"reason", s.ack_reason}};
  if (f.trigger_ts) payload["latency_ms"] = s.updated_at - *f.trigger_ts;
  in_flight_.erase(it);
  emit(EventKind::CommandAcked, std::move(payload));
}

const engine::WorkerSession* SafetyServer::session(const std::string& worker_id) const {
  auto it = sessions_.find(worker_id);
  return it == sessions_.end() ? nullptr : &it->second;
}

std::vector<nlohmann::json> SafetyServer::history(const std::string& worker_id, VirtualMs from, VirtualMs to) const {
  if (!state().registry.has_worker(worker_id)) throw NotFound("unknown worker '" + worker_id + "'");
  std::vector<nlohmann::json> out;
  auto it = history_.find(worker_id);
  if (it == history_.end()) return out;
  for (const auto& j : it->second) {
    const auto ts = j.at("recv_ts").get<VirtualMs>();
    if (ts >= from && ts <= to) out.push_back(j);
  }
  return out;
}

engine::SuitabilityVerdict SafetyServer::suitability(const SuitabilityQuery& q) const {
  std::optional<engine::StressLevel> level = q.stress_level;
  std::vector<std::string> notes;
  if (!level) {
    if (!q.worker_id) throw std::invalid_argument("need worker_id or stress_level");
    if (!state().registry.has_worker(*q.worker_id)) throw NotFound("unknown worker '" + *q.worker_id + "'");
    auto it = state().assessments.find(*q.worker_id);
    if (it == state().assessments.end() || it->second.calibrating) {
      level = engine::StressLevel::L0;
      notes.push_back("worker " + *q.worker_id + " is still calibrating; assuming L0");
    } else {
      level = it->second.level;
    }
  }
  std::optional<engine::RiskClass> risk = q.risk_class;
  if (!risk) {
    if (!q.machine_id) throw std::invalid_argument("need machine_id or risk_class");
    if (!state().registry.has_machine(*q.machine_id)) throw NotFound("unknown machine '" + *q.machine_id + "'");
    risk = state().registry.machines().at(*q.machine_id).risk_class;
  }
  auto v = engine::assess_suitability(*level, *risk);
  v.reasons.insert(v.reasons.end(), notes.begin(), notes.end());
  return v;
}

}  // namespace swsk::server
