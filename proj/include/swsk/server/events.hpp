#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "swsk/core/time.hpp"

namespace swsk::server {

enum class EventKind : std::uint8_t {
  Telemetry,
  Alert,
  Assessment,
  CommandIssued,
  CommandAcked,
  StateChange,
  RegistryChange,
  Notification,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct EventRecord {
  std::uint64_t event_seq = 0;
  VirtualMs ts = 0;
  EventKind kind = EventKind::Telemetry;
  nlohmann::json payload;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// One JSONL line: {"event_seq", "ts", "kind", "payload"}.
nlohmann::json to_json(const EventRecord& e);
/// Throws SchemaError.
EventRecord event_from_json(const nlohmann::json& j);

}  // namespace swsk::server
