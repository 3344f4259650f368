#include "swsk/system/simulation.hpp"

#include <fstream>
#include <sstream>

#include "swsk/bus/broker.hpp"
#include "swsk/bus/transport.hpp"
#include "swsk/core/errors.hpp"
#include "swsk/core/hash.hpp"
#include "swsk/device/generator.hpp"
#include "swsk/gateway/gateway.hpp"
#include "swsk/machine/node.hpp"
#include "swsk/server/event_log.hpp"
#include "swsk/server/server.hpp"

namespace swsk::system {

using nlohmann::json;

namespace {

VirtualMs to_ms(double s) { return static_cast<VirtualMs>(std::llround(s * 1000.0)); }

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// The device -> phone radio hop. Not part of the broker: frames are raw bytes
// delivered straight to the gateway after the link delay, or lost.
class BleLink {
 public:
  struct Window {
    VirtualMs start = 0, end = 0;
    std::optional<double> drop_prob;
  };

  BleLink(bus::LinkFault fault, std::vector<Window> windows, std::uint64_t seed)
      : fault_(std::move(fault)), windows_(std::move(windows)), rng_(seed) {}

  /// Delay for a frame sent at `now`, or nullopt when it is lost.
  std::optional<VirtualMs> transmit(VirtualMs now) {
    double p = fault_.drop_prob;
    if (fault_.partitioned_at(now)) return std::nullopt;
    for (const auto& w : windows_) {
      if (now < w.start || now >= w.end) continue;
      if (!w.drop_prob) return std::nullopt;
      p = *w.drop_prob;
    }
    // Both draws always happen so one fault setting does not shift the stream.
    const double u = rng_.uniform();
    VirtualMs extra = static_cast<VirtualMs>(rng_.uniform() * static_cast<double>(fault_.jitter_ms + 1));
    extra = std::min(extra, fault_.jitter_ms);
    ++sent_;
    if (u < p) {
      ++lost_;
      return std::nullopt;
    }
    return fault_.latency_ms + extra;
  }

  std::uint64_t sent() const { return sent_; }
  std::uint64_t lost() const { return lost_; }

 private:
  bus::LinkFault fault_;
  std::vector<Window> windows_;
  Rng rng_;
  std::uint64_t sent_ = 0;
  std::uint64_t lost_ = 0;
};

struct WorkerRig {
  WorkerSpec spec;
  std::unique_ptr<bus::BusTransport> transport;
  std::unique_ptr<gateway::Gateway> gateway;
  std::unique_ptr<device::DeviceSimulator> device;
  std::unique_ptr<device::ImuSimulator> imu;
  std::unique_ptr<BleLink> ble;
  std::function<void()> emit;
  std::function<void()> poll;
};

struct MachineRig {
  std::unique_ptr<bus::BusTransport> transport;
  std::unique_ptr<machine::MachineNode> node;
};

std::vector<ExpectationResult> check(const Expectations& e, const SimReport& r) {
  std::vector<ExpectationResult> out;
  auto add = [&](std::string name, json expected, json actual, bool pass) {
    out.push_back({std::move(name), std::move(expected), std::move(actual), pass});
  };
  std::size_t estops = 0;
  for (const auto& c : r.commands) estops += c.type == "ESTOP";
  if (e.estop_issued) add("estop_issued", *e.estop_issued, estops > 0, (estops > 0) == *e.estop_issued);
  if (e.max_commands) add("max_commands", *e.max_commands, r.commands.size(), r.commands.size() <= *e.max_commands);
  if (e.estop_within_ms) {
    // Every automatic stop must be confirmed in time; at least one must exist.
    json worst = nullptr;
    bool ok = false;
    bool any = false;
    for (const auto& c : r.commands) {
      if (c.type != "ESTOP" || c.source != "auto") continue;
      if (!any) ok = true;
      any = true;
      if (!c.latency_ms) {
        ok = false;
        worst = "unconfirmed";
        continue;
      }
      if (worst.is_null() || (worst.is_number() && *c.latency_ms > worst.get<VirtualMs>())) worst = *c.latency_ms;
      ok = ok && *c.latency_ms <= *e.estop_within_ms;
    }
    add("estop_within_ms", *e.estop_within_ms, worst, ok);
  }
  if (e.button_stop_within_ms) {
    json actual = nullptr;
    bool ok = false;
    if (!r.first_button_frame.empty()) {
      ok = true;
      VirtualMs worst = 0;
      for (const auto& [worker, frame_ts] : r.first_button_frame) {
        std::optional<VirtualMs> stop;
        for (const auto& c : r.commands) {
          if (c.source == "device_button" && c.worker_id == worker && c.stop_ts) {
            stop = *c.stop_ts;
            break;
          }
        }
        if (!stop) {
          ok = false;
          actual = "no confirmed button stop for " + worker;
          break;
        }
        worst = std::max(worst, *stop - frame_ts);
        actual = worst;
      }
      ok = ok && worst <= *e.button_stop_within_ms;
    }
    add("button_stop_within_ms", *e.button_stop_within_ms, actual, ok);
  }
  for (const auto& [id, mode] : e.final_modes) {
    const auto& m = r.machines.at(id);
    const auto want = std::string(machine::to_string(mode));
    add("final_mode." + id, want, m.mode, m.mode == want && m.server_view == want);
  }
  for (const auto& [id, n] : e.state_changes) {
    const auto& m = r.machines.at(id);
    add("state_changes." + id, n, json{{"server", m.state_changes}, {"controller", m.transitions}},
        m.state_changes == n && m.transitions == n);
  }
  auto count = [](const std::map<std::string, std::uint64_t>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? std::uint64_t{0} : it->second;
  };
  for (const auto& c : e.alerts_present) add("alert_present." + c, true, count(r.alert_counts, c), count(r.alert_counts, c) > 0);
  for (const auto& c : e.alerts_absent) add("alert_absent." + c, true, count(r.alert_counts, c), count(r.alert_counts, c) == 0);
  for (const auto& c : e.notifications_present) {
    add("notification_present." + c, true, count(r.notification_counts, c), count(r.notification_counts, c) > 0);
  }
  for (const auto& c : e.notifications_absent) {
    add("notification_absent." + c, true, count(r.notification_counts, c), count(r.notification_counts, c) == 0);
  }
  return out;
}

}  // namespace

SimRun run_simulation(SystemScenario scenario, const SystemConfig& config, const SimOptions& options) {
  if (options.seed) scenario.set_seed(*options.seed);
  const VirtualMs duration_ms = to_ms(scenario.duration_s);

  // Effective link faults: config, then scenario overrides, then partition windows.
  std::map<std::string, bus::LinkFault> faults;
  for (const auto& name : scenario.link_names()) {
    faults[name] = config.link(name);
    if (auto it = scenario.links.find(name); it != scenario.links.end()) {
      faults[name] = link_fault_from_json(it->second, "links." + name, faults[name]);
    }
  }
  std::map<std::string, std::vector<BleLink::Window>> ble_windows;
  std::vector<std::pair<std::string, device::LinkFaultWindow>> drop_windows;
  for (const auto& w : scenario.workers) {
    for (const auto& lf : w.script.segments_of<device::LinkFaultWindow>()) {
      const VirtualMs start = to_ms(lf.start_s);
      const VirtualMs end = to_ms(lf.end_s);
      if (lf.link.rfind("ble:", 0) == 0) {
        ble_windows[lf.link].push_back({start, end, lf.drop_prob});
      } else if (!lf.drop_prob) {
        faults[lf.link].partitions.push_back({start, end});
      } else {
        drop_windows.emplace_back(lf.link, lf);
      }
    }
  }

  sim::Scheduler sched;
  bus::BrokerConfig bc;
  bc.seed = scenario.seed ^ 0xb5b5b5b5ULL;
  bus::Broker broker(sched, bc);

  std::optional<std::filesystem::path> log_dir = options.out_dir;
  if (log_dir) {
    std::filesystem::create_directories(*log_dir);
    std::filesystem::remove(*log_dir / server::kEventLogFile);
    std::filesystem::remove(*log_dir / server::kSnapshotFile);
  }
  server::EventLog log({log_dir, 10000, true});

  std::map<std::string, bus::Broker::ClientId> clients;
  auto connect = [&](const std::string& name) {
    auto f = faults.at(name);
    try {
      f.validate();
    } catch (const std::invalid_argument& e) {
      throw SchemaError("links." + name, e.what());
    }
    clients[name] = broker.connect(name, f);
    return clients[name];
  };

  auto server_cfg = config.server;
  server_cfg.seed = scenario.seed;
  bus::BusTransport server_transport(broker, connect(kServerLink));
  server::SafetyServer server(server_cfg, server_transport, sched, log);

  std::map<std::string, MachineRig> machines;
  for (const auto& m : scenario.machines) {
    auto& rig = machines[m.id];
    rig.transport = std::make_unique<bus::BusTransport>(broker, connect(machine_link(m.id)));
    rig.node = std::make_unique<machine::MachineNode>(server_cfg.site, m.id, *rig.transport, sched, config.controller);
    server.register_machine(m.id, m.params);
  }

  SimReport report;
  std::vector<std::unique_ptr<WorkerRig>> workers;
  for (const auto& w : scenario.workers) {
    auto rig = std::make_unique<WorkerRig>();
    rig->spec = w;
    rig->transport = std::make_unique<bus::BusTransport>(broker, connect(gateway_link(w.id)));
    auto gc = config.gateway;
    gc.worker_id = w.id;
    gc.site_id = server_cfg.site;
    rig->gateway = std::make_unique<gateway::Gateway>(gc, *rig->transport, [&sched] { return sched.now(); });
    rig->device = std::make_unique<device::DeviceSimulator>(w.profile, w.script, w.id);
    rig->imu = std::make_unique<device::ImuSimulator>(w.script, w.id);
    rig->ble = std::make_unique<BleLink>(faults.at(ble_link(w.id)), ble_windows[ble_link(w.id)],
                                         scenario.seed ^ fnv1a64(ble_link(w.id)));
    server.register_worker(w.id, w.meta);
    if (w.machine) server.assign(w.id, *w.machine);
    workers.push_back(std::move(rig));
  }

  for (auto& [id, rig] : machines) rig.node->start();
  server.start();

  for (auto& rig_ptr : workers) {
    WorkerRig* rig = rig_ptr.get();
    rig->emit = [rig, &sched, &report] {
      auto e = rig->device->next();
      if (!e) return;
      // Phone IMU is read locally; only the wearable frame crosses the radio.
      rig->gateway->on_motion(rig->imu->sample(static_cast<double>(e->t_ms) / 1000.0));
      if (e->frame.flags.test(telemetry::FrameFlag::ButtonEstop) && !report.first_button_frame.contains(rig->spec.id)) {
        report.first_button_frame[rig->spec.id] = e->t_ms;
      }
      if (auto delay = rig->ble->transmit(sched.now())) {
        sched.schedule_after(*delay, [rig, bytes = e->bytes] { rig->gateway->on_frame(bytes); });
      }
      if (!rig->device->done()) sched.schedule_at(rig->device->next_time_ms(), [rig] { rig->emit(); });
    };
    if (!rig->device->done()) sched.schedule_at(rig->device->next_time_ms(), [rig] { rig->emit(); });
    rig->poll = [rig, &sched, duration_ms] {
      rig->gateway->poll();
      if (sched.now() < duration_ms) sched.schedule_after(100, [rig] { rig->poll(); });
    };
    sched.schedule_at(0, [rig] { rig->poll(); });
  }

  for (const auto& [link, w] : drop_windows) {
    const auto client = clients.at(link);
    const auto base = faults.at(link);
    auto windowed = base;
    windowed.drop_prob = *w.drop_prob;
    sched.schedule_at(to_ms(w.start_s), [&broker, client, windowed] { broker.set_link_fault(client, windowed); });
    sched.schedule_at(to_ms(w.end_s), [&broker, client, base] { broker.set_link_fault(client, base); });
  }
  for (const auto& step : scenario.operator_actions) {
    sched.schedule_at(step.at_ms, [&server, step] {
      if (step.action == OperatorAction::Estop) {
        server.issue_estop(step.machine_id, engine::CommandSource::Operator, step.reason);
      } else {
        server.issue_reset(step.machine_id, step.reason);
      }
    });
  }
  for (const auto& p : scenario.server_pauses) {
    sched.schedule_at(p.at_ms, [&server, p] { server.pause_for(p.duration_ms); });
  }

  // Run past the end so in-flight commands are confirmed or escalated.
  const VirtualMs end = duration_ms + server_cfg.confirm_timeout_ms + 1000;
  sched.run_until(end);
  log.flush();

  report.scenario = scenario.name;
  report.seed = scenario.seed;
  report.duration_s = scenario.duration_s;
  report.end_ts = end;
  const auto& st = log.state();
  for (const auto& [code, n] : st.alert_counts) report.alert_counts[code] = n;
  for (const auto& [code, n] : st.notification_counts) report.notification_counts[code] = n;

  std::map<std::string, std::size_t> state_changes;
  std::map<std::string, json> issued;
  std::map<std::string, json> acked;
  for (const auto& e : log.records()) {
    if (e.kind == server::EventKind::StateChange) ++state_changes[e.payload.at("machine_id").get<std::string>()];
    if (e.kind == server::EventKind::CommandIssued) issued[e.payload.at("cmd_id").get<std::string>()] = e.payload;
    if (e.kind == server::EventKind::CommandAcked) acked[e.payload.at("cmd_id").get<std::string>()] = e.payload;
  }
  for (const auto& e : log.records()) {
    if (e.kind != server::EventKind::CommandIssued) continue;
    const auto& p = e.payload;
    CommandRecord c;
    c.cmd_id = p.at("cmd_id");
    c.machine_id = p.at("machine_id");
    c.type = p.at("type");
    c.source = p.at("source");
    if (p.at("worker_id").is_string()) c.worker_id = p.at("worker_id");
    c.issued_at = p.at("issued_at");
    c.trigger_ts = p.at("trigger_ts").is_number() ? std::optional<VirtualMs>(p.at("trigger_ts")) : std::nullopt;
    if (auto a = acked.find(c.cmd_id); a != acked.end()) {
      c.ack_status = a->second.at("status");
      c.stop_ts = a->second.at("machine_updated_at");
      c.latency_ms = *c.stop_ts - c.trigger_ts.value_or(c.issued_at);
    }
    c.escalated = st.commands.contains(c.cmd_id) && st.commands.at(c.cmd_id).escalated;
    report.commands.push_back(std::move(c));
  }
  for (const auto& [id, rig] : machines) {
    const auto& s = rig.node->state();
    report.machines[id] = MachineFinal{std::string(machine::to_string(s.mode)),
                                       s.latched,
                                       s.last_cause,
                                       state_changes[id],
                                       rig.node->transitions().size(),
                                       std::string(machine::to_string(st.registry.machines().at(id).status.mode))};
  }
  if (log.path()) report.event_log_path = log.path()->string();
  report.event_log_sha256 = log.digest();
  report.events = log.last_seq();
  report.state_hash = server::state_hash(st);

  const auto& bs = broker.stats();
  json gw = json::object();
  for (const auto& w : workers) {
    const auto& g = w->gateway->stats();
    gw[w->spec.id] = {{"ble_sent", w->ble->sent()},
                      {"ble_lost", w->ble->lost()},
                      {"frames_ok", g.frames_ok},
                      {"frames_crc_fail", g.frames_crc_fail},
                      {"frames_dropped_dup", g.frames_dropped_dup},
                      {"msgs_published", g.msgs_published},
                      {"msgs_buffered", g.msgs_buffered},
                      {"msgs_dropped_overflow", g.msgs_dropped_overflow}};
  }
  const auto& sc = server.counters();
  report.stats = {{"bus",
                   {{"published", bs.published},
                    {"delivered", bs.delivered},
                    {"duplicates", bs.duplicates},
                    {"transmissions_lost", bs.transmissions_lost},
                    {"retransmissions", bs.retransmissions},
                    {"dead_letters", bs.dead_letters}}},
                  {"gateways", gw},
                  {"server",
                   {{"telemetry_accepted", sc.telemetry_accepted},
                    {"telemetry_duplicates", sc.telemetry_duplicates},
                    {"telemetry_malformed", sc.telemetry_malformed},
                    {"telemetry_quarantined", sc.telemetry_quarantined},
                    {"heartbeats_sent", sc.heartbeats_sent}}}};

  report.expectations = check(scenario.expect, report);
  report.pass = true;
  for (const auto& x : report.expectations) report.pass = report.pass && x.pass;

  if (options.out_dir) {
    std::ofstream out(*options.out_dir / "report.json");
    out << to_json(report).dump(2) << "\n";
  }
  return SimRun{std::move(report), st, options.keep_records ? log.records() : std::vector<server::EventRecord>{}};
}

json to_json(const SimReport& r) {
  json commands = json::array();
  for (const auto& c : r.commands) {
    commands.push_back({{"cmd_id", c.cmd_id},
                        {"machine_id", c.machine_id},
                        {"type", c.type},
                        {"source", c.source},
                        {"worker_id", opt(c.worker_id)},
                        {"issued_at", c.issued_at},
                        {"trigger_ts", opt(c.trigger_ts)},
                        {"stop_ts", opt(c.stop_ts)},
                        {"latency_ms", opt(c.latency_ms)},
                        {"ack_status", opt(c.ack_status)},
                        {"escalated", c.escalated}});
  }
  json machines = json::object();
  for (const auto& [id, m] : r.machines) {
    machines[id] = {{"mode", m.mode},
                    {"latched", m.latched},
                    {"last_cause", m.last_cause},
                    {"state_changes", m.state_changes},
                    {"transitions", m.transitions},
                    {"server_view", m.server_view}};
  }
  json expectations = json::array();
  for (const auto& e : r.expectations) {
    expectations.push_back({{"name", e.name}, {"expected", e.expected}, {"actual", e.actual}, {"pass", e.pass}});
  }
  return {{"scenario", r.scenario},
          {"seed", r.seed},
          {"duration_s", r.duration_s},
          {"end_ts", r.end_ts},
          {"alert_counts", r.alert_counts},
          {"notification_counts", r.notification_counts},
          {"commands", commands},
          {"machines", machines},
          {"first_button_frame", r.first_button_frame},
          {"event_log", {{"path", r.event_log_path}, {"sha256", r.event_log_sha256}, {"events", r.events}}},
          {"state_hash", r.state_hash},
          {"stats", r.stats},
          {"expectations", expectations},
          {"verdict", r.pass ? "PASS" : "FAIL"}};
}

std::string format_human(const SimReport& r) {
  std::ostringstream o;
  o << "scenario " << r.scenario << " (seed " << r.seed << ", " << r.duration_s << " s)\n";
  o << "alerts:";
  if (r.alert_counts.empty()) o << " none";
  for (const auto& [code, n] : r.alert_counts) o << " " << code << "=" << n;
  o << "\nnotifications:";
  if (r.notification_counts.empty()) o << " none";
  for (const auto& [code, n] : r.notification_counts) o << " " << code << "=" << n;
  o << "\ncommands: " << r.commands.size() << "\n";
  for (const auto& c : r.commands) {
    o << "  " << c.type << " " << c.machine_id << " source=" << c.source;
    if (c.worker_id) o << " worker=" << *c.worker_id;
    o << " issued=" << c.issued_at;
    if (c.trigger_ts) o << " trigger=" << *c.trigger_ts;
    if (c.stop_ts) {
      o << " stop=" << *c.stop_ts << " latency=" << *c.latency_ms << "ms";
    } else {
      o << " unconfirmed";
    }
    if (c.escalated) o << " escalated";
    o << "\n";
  }
  o << "machines:\n";
  for (const auto& [id, m] : r.machines) {
    o << "  " << id << " " << m.mode << (m.latched ? " latched" : "");
    if (!m.last_cause.empty()) o << " cause=\"" << m.last_cause << "\"";
    o << " state_changes=" << m.state_changes << "\n";
  }
  o << "event log: " << (r.event_log_path.empty() ? "(memory)" : r.event_log_path) << " events=" << r.events
    << " sha256=" << r.event_log_sha256 << "\n";
  for (const auto& e : r.expectations) {
    o << (e.pass ? "  ok   " : "  FAIL ") << e.name << ": expected " << e.expected.dump() << ", got " << e.actual.dump()
      << "\n";
  }
  o << "verdict: " << (r.pass ? "PASS" : "FAIL") << "\n";
  return o.str();
}

}  // namespace swsk::system
