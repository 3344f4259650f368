#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swsk::bus {

class InvalidFilter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Topic names: non-empty, no wildcard characters.
bool is_valid_topic(std::string_view topic);

std::vector<std::string_view> split_levels(std::string_view topic);

// Subscription filter with MQTT wildcard rules: `+` matches exactly one
// level, a trailing `#` matches the parent level and everything below it.
class TopicFilter {
 public:
  /// Throws InvalidFilter when `#` is not the last level or a wildcard shares a level.
  static TopicFilter parse(std::string_view filter);

  bool matches(std::string_view topic) const;
  const std::string& str() const { return text_; }

 private:
  explicit TopicFilter(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

/// Normative topic scheme.
namespace topics {
std::string telemetry(std::string_view site, std::string_view worker_id);
std::string command(std::string_view site, std::string_view machine_id);
std::string state(std::string_view site, std::string_view machine_id);
std::string heartbeat(std::string_view site);
// Raw 28-byte device frames when device and gateway run as separate processes.
std::string device_link(std::string_view site, std::string_view worker_id);

std::string all_telemetry(std::string_view site);
std::string all_states(std::string_view site);

/// Extracts the {id} level from ".../worker/{id}/..." or ".../machine/{id}/...".
std::string entity_id(std::string_view topic);
}  // namespace topics

}  // namespace swsk::bus
