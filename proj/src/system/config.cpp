#include "swsk/system/config.hpp"

#include <fstream>

#include "swsk/core/errors.hpp"
#include "swsk/core/json_reader.hpp"

namespace swsk::system {

using nlohmann::json;

std::string ble_link(const std::string& worker_id) { return "ble:" + worker_id; }
std::string gateway_link(const std::string& worker_id) { return "gateway:" + worker_id; }
std::string machine_link(const std::string& machine_id) { return "machine:" + machine_id; }

bus::LinkFault link_fault_from_json(const json& j, const std::string& path, const bus::LinkFault& base) {
  JsonReader r(j, path);
  r.only({"latency_ms", "jitter_ms", "drop_prob", "topic_drops", "partitions"});
  bus::LinkFault f = base;
  f.latency_ms = r.integer("latency_ms", f.latency_ms);
  f.jitter_ms = r.integer("jitter_ms", f.jitter_ms);
  f.drop_prob = r.number("drop_prob", f.drop_prob);
  if (r.has("topic_drops")) {
    f.topic_drops.clear();
    const auto& arr = r.array("topic_drops");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonReader d(arr[i], r.child_path("topic_drops") + "[" + std::to_string(i) + "]");
      d.only({"filter", "drop_prob"});
      bus::TopicDrop td{d.string("filter"), d.number("drop_prob")};
      try {
        (void)bus::TopicFilter::parse(td.filter);
      } catch (const std::exception& e) {
        d.fail("filter", e.what());
      }
      f.topic_drops.push_back(std::move(td));
    }
  }
  if (r.has("partitions")) {
    f.partitions.clear();
    const auto& arr = r.array("partitions");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonReader p(arr[i], r.child_path("partitions") + "[" + std::to_string(i) + "]");
      p.only({"start_ms", "end_ms"});
      f.partitions.push_back({p.integer("start_ms"), p.integer("end_ms")});
    }
  }
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  return f;
}

json to_json(const bus::LinkFault& f) {
  json drops = json::array();
  for (const auto& d : f.topic_drops) drops.push_back({{"filter", d.filter}, {"drop_prob", d.drop_prob}});
  json parts = json::array();
  for (const auto& p : f.partitions) parts.push_back({{"start_ms", p.start}, {"end_ms", p.end}});
  return {{"latency_ms", f.latency_ms},
          {"jitter_ms", f.jitter_ms},
          {"drop_prob", f.drop_prob},
          {"topic_drops", drops},
          {"partitions", parts}};
}

bus::LinkFault SystemConfig::link(const std::string& name) const {
  if (auto it = links.find(name); it != links.end()) return it->second;
  return name.rfind("ble:", 0) == 0 ? ble_link : default_link;
}

namespace {

void read_gateway(const JsonReader& r, gateway::GatewayConfig& g) {
  r.only({"buffer_capacity", "dedup_window", "backoff"});
  g.buffer_capacity = r.unsigned_integer("buffer_capacity", g.buffer_capacity);
  g.dedup_window = r.unsigned_integer("dedup_window", g.dedup_window);
  if (r.has("backoff")) {
    auto b = r.object("backoff");
    b.only({"initial_ms", "factor", "cap_ms"});
    g.backoff.initial_ms = b.integer("initial_ms", g.backoff.initial_ms);
    g.backoff.factor = b.number("factor", g.backoff.factor);
    g.backoff.cap_ms = b.integer("cap_ms", g.backoff.cap_ms);
  }
  auto probe = g;
  probe.worker_id = "w";
  probe.site_id = "s";
  try {
    probe.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

void read_controller(const JsonReader& r, machine::ControllerConfig& c) {
  r.only({"watchdog_ms", "seen_capacity", "tick_ms"});
  c.watchdog_ms = r.integer("watchdog_ms", c.watchdog_ms);
  c.seen_capacity = r.unsigned_integer("seen_capacity", c.seen_capacity);
  c.tick_ms = r.integer("tick_ms", c.tick_ms);
  if (c.watchdog_ms <= 0) r.fail("watchdog_ms", "must be > 0");
  if (c.tick_ms <= 0) r.fail("tick_ms", "must be > 0");
  if (c.seen_capacity == 0) r.fail("seen_capacity", "must be > 0");
}

}  // namespace

SystemConfig system_config_from_json(const json& j, const std::string& path) {
  JsonReader r(j, path);
  r.only({"site", "engine", "server", "gateway", "machine", "links"});
  SystemConfig c;
  if (r.has("server")) c.server = server::server_config_from_json(r.raw().at("server"), r.child_path("server"));
  if (r.has("site")) {
    json s = r.has("server") ? r.raw().at("server") : json::object();
    s["site"] = r.string("site");
    c.server.site = server::server_config_from_json(s, r.child_path("site")).site;
  }
  if (r.has("engine")) c.server.engine = engine::engine_config_from_json(r.raw().at("engine"), r.child_path("engine"));
  if (r.has("gateway")) read_gateway(r.object("gateway"), c.gateway);
  if (r.has("machine")) read_controller(r.object("machine"), c.controller);
  if (r.has("links")) {
    auto links = r.object("links");
    for (auto it = links.raw().begin(); it != links.raw().end(); ++it) {
      const auto p = links.child_path(it.key());
      if (it.key() == "default") {
        c.default_link = link_fault_from_json(it.value(), p, c.default_link);
      } else if (it.key() == "ble") {
        c.ble_link = link_fault_from_json(it.value(), p, c.ble_link);
      }
    }
    for (auto it = links.raw().begin(); it != links.raw().end(); ++it) {
      if (it.key() == "default" || it.key() == "ble") continue;
      c.links[it.key()] = link_fault_from_json(it.value(), links.child_path(it.key()), c.link(it.key()));
    }
  }
  return c;
}

SystemConfig load_system_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError(file, "cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(file, std::string("invalid JSON: ") + e.what());
  }
  return system_config_from_json(j);
}

json to_json(const SystemConfig& c) {
  json links = {{"default", to_json(c.default_link)}, {"ble", to_json(c.ble_link)}};
  for (const auto& [name, f] : c.links) links[name] = to_json(f);
  return {{"site", c.server.site},
          {"engine", engine::to_json(c.server.engine)},
          {"server",
           {{"heartbeat_ms", c.server.heartbeat_ms},
            {"confirm_timeout_ms", c.server.confirm_timeout_ms},
            {"seed", c.server.seed},
            {"history_capacity", c.server.history_capacity}}},
          {"gateway",
           {{"buffer_capacity", c.gateway.buffer_capacity},
            {"dedup_window", c.gateway.dedup_window},
            {"backoff",
             {{"initial_ms", c.gateway.backoff.initial_ms},
              {"factor", c.gateway.backoff.factor},
              {"cap_ms", c.gateway.backoff.cap_ms}}}}},
          {"machine",
           {{"watchdog_ms", c.controller.watchdog_ms},
            {"seen_capacity", c.controller.seen_capacity},
            {"tick_ms", c.controller.tick_ms}}},
          {"links", links}};
}

}  // namespace swsk::system
