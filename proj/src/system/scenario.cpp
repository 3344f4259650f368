#include "swsk/system/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "swsk/bus/topic.hpp"
#include "swsk/core/errors.hpp"
#include "swsk/core/json_reader.hpp"
#include "swsk/engine/alerts.hpp"
#include "swsk/server/state.hpp"
#include "swsk/system/config.hpp"

namespace swsk::system {

using nlohmann::json;

bool Expectations::empty() const {
  return !estop_issued && !max_commands && !estop_within_ms && !button_stop_within_ms && final_modes.empty() &&
         state_changes.empty() && alerts_present.empty() && alerts_absent.empty() && notifications_present.empty() &&
         notifications_absent.empty();
}

std::vector<std::string> SystemScenario::link_names() const {
  std::vector<std::string> out{kServerLink};
  for (const auto& w : workers) {
    out.push_back(ble_link(w.id));
    out.push_back(gateway_link(w.id));
  }
  for (const auto& m : machines) out.push_back(machine_link(m.id));
  return out;
}

void SystemScenario::set_seed(std::uint64_t s) {
  seed = s;
  for (auto& w : workers) w.script.seed = s;
}

namespace {

std::string indexed(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void check_id(const JsonReader& r, const std::string& key, const std::string& id) {
  if (id.empty() || !bus::is_valid_topic(id) || id.find('/') != std::string::npos) {
    r.fail(key, "'" + id + "' is not a valid single topic level");
  }
}

VirtualMs seconds_to_ms(double s) { return static_cast<VirtualMs>(std::llround(s * 1000.0)); }

std::vector<std::string> string_list(const JsonReader& r, std::string_view key) {
  std::vector<std::string> out;
  if (!r.has(key)) return out;
  const auto& arr = r.array(key);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) throw SchemaError(indexed(r.child_path(key), i), "expected a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

void check_alert_codes(const JsonReader& r, std::string_view key, const std::vector<std::string>& codes) {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (!engine::parse_alert_code(codes[i])) throw SchemaError(indexed(r.child_path(key), i), "unknown alert code");
  }
}

Expectations expectations_from_json(const JsonReader& r, const std::set<std::string>& machines) {
  r.only({"estop_issued", "max_commands", "estop_within_ms", "button_stop_within_ms", "final_modes", "state_changes",
          "alerts_present", "alerts_absent", "notifications_present", "notifications_absent"});
  Expectations e;
  if (r.has("estop_issued")) e.estop_issued = r.boolean("estop_issued", false);
  if (r.has("max_commands")) e.max_commands = r.unsigned_integer("max_commands", 0);
  if (r.has("estop_within_ms")) e.estop_within_ms = static_cast<VirtualMs>(r.unsigned_integer("estop_within_ms", 0));
  if (r.has("button_stop_within_ms")) {
    e.button_stop_within_ms = static_cast<VirtualMs>(r.unsigned_integer("button_stop_within_ms", 0));
  }
  if (r.has("final_modes")) {
    auto m = r.object("final_modes");
    for (auto it = m.raw().begin(); it != m.raw().end(); ++it) {
      if (!machines.contains(it.key())) m.fail(it.key(), "unknown machine");
      const auto mode = machine::parse_machine_mode(m.string(it.key()));
      if (!mode) m.fail(it.key(), "expected RUNNING, EMERGENCY_STOP or SAFE_STOP");
      e.final_modes[it.key()] = *mode;
    }
  }
  if (r.has("state_changes")) {
    auto m = r.object("state_changes");
    for (auto it = m.raw().begin(); it != m.raw().end(); ++it) {
      if (!machines.contains(it.key())) m.fail(it.key(), "unknown machine");
      e.state_changes[it.key()] = m.unsigned_integer(it.key(), 0);
    }
  }
  e.alerts_present = string_list(r, "alerts_present");
  e.alerts_absent = string_list(r, "alerts_absent");
  check_alert_codes(r, "alerts_present", e.alerts_present);
  check_alert_codes(r, "alerts_absent", e.alerts_absent);
  e.notifications_present = string_list(r, "notifications_present");
  e.notifications_absent = string_list(r, "notifications_absent");
  return e;
}

}  // namespace

SystemScenario system_scenario_from_json(const json& j, const std::string& path) {
  JsonReader r(j, path);
  r.only({"name", "description", "seed", "duration_s", "sample_rate_hz", "workers", "machines", "links",
          "operator_actions", "server_pauses", "expect"});
  SystemScenario s;
  s.name = r.string("name");
  s.description = r.string("description", "");
  s.seed = r.unsigned_integer("seed", 0);
  s.duration_s = r.number("duration_s");
  if (!(s.duration_s > 0.0) || !std::isfinite(s.duration_s)) r.fail("duration_s", "must be > 0");
  device::ScenarioScript defaults;
  defaults.seed = s.seed;
  defaults.duration_s = s.duration_s;
  defaults.sample_rate_hz = r.number("sample_rate_hz", defaults.sample_rate_hz);

  std::set<std::string> machine_ids;
  const auto& machines = r.array("machines");
  for (std::size_t i = 0; i < machines.size(); ++i) {
    JsonReader m(machines[i], indexed(r.child_path("machines"), i));
    m.only({"id", "S", "F", "P"});
    MachineSpec spec{m.string("id"), {}};
    check_id(m, "id", spec.id);
    if (!machine_ids.insert(spec.id).second) m.fail("id", "duplicate machine id");
    json params = m.raw();
    params.erase("id");
    spec.params = server::risk_params_from_json(params, m.path());
    s.machines.push_back(std::move(spec));
  }

  std::set<std::string> worker_ids;
  std::set<std::string> taken;
  const auto& workers = r.array("workers");
  if (workers.empty()) r.fail("workers", "at least one worker is required");
  for (std::size_t i = 0; i < workers.size(); ++i) {
    JsonReader w(workers[i], indexed(r.child_path("workers"), i));
    w.only({"id", "profile", "scenario", "machine", "meta"});
    WorkerSpec spec;
    spec.id = w.string("id");
    check_id(w, "id", spec.id);
    if (!worker_ids.insert(spec.id).second) w.fail("id", "duplicate worker id");
    if (w.has("profile")) spec.profile = device::profile_from_json(w.raw().at("profile"), w.child_path("profile"));
    const json script = w.has("scenario") ? w.raw().at("scenario") : json::object();
    spec.script = device::scenario_from_json(script, w.child_path("scenario"), defaults);
    if (w.has("scenario")) {
      JsonReader sr(script, w.child_path("scenario"));
      if (sr.has("seed")) sr.fail("seed", "set the seed at the top level");
      if (sr.has("duration_s") && spec.script.duration_s != s.duration_s) sr.fail("duration_s", "must match the system duration");
    }
    if (w.has("machine")) {
      spec.machine = w.string("machine");
      if (!machine_ids.contains(*spec.machine)) w.fail("machine", "unknown machine");
      if (!taken.insert(*spec.machine).second) w.fail("machine", "machine already assigned to another worker");
    }
    if (w.has("meta")) spec.meta = w.object("meta").raw();
    s.workers.push_back(std::move(spec));
  }

  const auto names = s.link_names();
  auto known_link = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
  if (r.has("links")) {
    auto links = r.object("links");
    for (auto it = links.raw().begin(); it != links.raw().end(); ++it) {
      if (!known_link(it.key())) links.fail(it.key(), "unknown link");
      (void)link_fault_from_json(it.value(), links.child_path(it.key()));
      s.links[it.key()] = it.value();
    }
  }
  for (std::size_t i = 0; i < s.workers.size(); ++i) {
    const auto segs = s.workers[i].script.segments_of<device::LinkFaultWindow>();
    for (const auto& lf : segs) {
      if (!known_link(lf.link)) {
        throw SchemaError(indexed(r.child_path("workers"), i) + ".scenario.segments", "unknown link '" + lf.link + "'");
      }
    }
  }

  if (r.has("operator_actions")) {
    const auto& arr = r.array("operator_actions");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonReader a(arr[i], indexed(r.child_path("operator_actions"), i));
      a.only({"at_s", "action", "machine", "reason"});
      OperatorStep step;
      const double at = a.number("at_s");
      if (at < 0 || at > s.duration_s) a.fail("at_s", "outside the scenario duration");
      step.at_ms = seconds_to_ms(at);
      const auto action = a.string("action");
      if (action == "estop") {
        step.action = OperatorAction::Estop;
      } else if (action == "reset") {
        step.action = OperatorAction::Reset;
      } else {
        a.fail("action", "expected \"estop\" or \"reset\"");
      }
      step.machine_id = a.string("machine");
      if (!machine_ids.contains(step.machine_id)) a.fail("machine", "unknown machine");
      step.reason = a.string("reason", "operator " + action);
      s.operator_actions.push_back(std::move(step));
    }
  }
  if (r.has("server_pauses")) {
    const auto& arr = r.array("server_pauses");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonReader p(arr[i], indexed(r.child_path("server_pauses"), i));
      p.only({"at_s", "duration_s"});
      const double at = p.number("at_s");
      const double dur = p.number("duration_s");
      if (at < 0 || at > s.duration_s) p.fail("at_s", "outside the scenario duration");
      if (!(dur > 0)) p.fail("duration_s", "must be > 0");
      s.server_pauses.push_back({seconds_to_ms(at), seconds_to_ms(dur)});
    }
  }
  if (r.has("expect")) s.expect = expectations_from_json(r.object("expect"), machine_ids);
  return s;
}

SystemScenario load_system_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError(file, "cannot open scenario file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(file, std::string("invalid JSON: ") + e.what());
  }
  return system_scenario_from_json(j);
}

}  // namespace swsk::system
