#include "swsk/server/events.hpp"

#include "swsk/core/json_reader.hpp"

namespace swsk::server {

namespace {

constexpr std::string_view kNames[] = {"TELEMETRY",    "ALERT",        "ASSESSMENT",      "COMMAND_ISSUED",
                                       "COMMAND_ACKED", "STATE_CHANGE", "REGISTRY_CHANGE", "NOTIFICATION"};

}  // namespace

std::string_view to_string(EventKind k) { return kNames[static_cast<int>(k)]; }

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kNames); ++i) {
    if (kNames[i] == s) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

nlohmann::json to_json(const EventRecord& e) {
  return {{"event_seq", e.event_seq}, {"ts", e.ts}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

EventRecord event_from_json(const nlohmann::json& j) {
  JsonReader r(j, "event");
  r.only({"event_seq", "ts", "kind", "payload"});
  EventRecord e;
  if (!r.has("event_seq")) r.fail("event_seq", "missing");
  e.event_seq = r.unsigned_integer("event_seq", 0);
  e.ts = r.integer("ts");
  auto kind = parse_event_kind(r.string("kind"));
  if (!kind) r.fail("kind", "unknown event kind");
  e.kind = *kind;
  if (!j.contains("payload")) r.fail("payload", "missing");
  e.payload = j.at("payload");
  return e;
}

}  // namespace swsk::server
