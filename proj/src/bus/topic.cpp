#include "swsk/bus/topic.hpp"

namespace swsk::bus {

std::vector<std::string_view> split_levels(std::string_view topic) {
  std::vector<std::string_view> levels;
  std::size_t start = 0;
  while (true) {
    const auto slash = topic.find('/', start);
    if (slash == std::string_view::npos) {
      levels.push_back(topic.substr(start));
      break;
    }
    levels.push_back(topic.substr(start, slash - start));
    start = slash + 1;
  }
  return levels;
}

bool is_valid_topic(std::string_view topic) {
  return !topic.empty() && topic.find_first_of("+#") == std::string_view::npos &&
         topic.find('\0') == std::string_view::npos;
}

TopicFilter TopicFilter::parse(std::string_view filter) {
  if (filter.empty()) throw InvalidFilter("empty filter");
  const auto levels = split_levels(filter);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto level = levels[i];
    if (level.find('#') != std::string_view::npos) {
      if (level != "#") throw InvalidFilter("'#' must occupy a whole level: " + std::string(filter));
      if (i + 1 != levels.size()) throw InvalidFilter("'#' must be the last level: " + std::string(filter));
    }
    if (level.find('+') != std::string_view::npos && level != "+") {
      throw InvalidFilter("'+' must occupy a whole level: " + std::string(filter));
    }
  }
  return TopicFilter(std::string(filter));
}

bool TopicFilter::matches(std::string_view topic) const {
  if (!is_valid_topic(topic)) return false;
  const auto f = split_levels(text_);
  const auto t = split_levels(topic);
  std::size_t i = 0;
  for (; i < f.size(); ++i) {
    if (f[i] == "#") return true;
    if (i >= t.size()) return false;
    if (f[i] != "+" && f[i] != t[i]) return false;
  }
  return i == t.size();
}

namespace topics {

namespace {
std::string join(std::initializer_list<std::string_view> parts) {
  std::string out = "swsk/v1";
  for (auto p : parts) {
    out.push_back('/');
    out.append(p);
  }
  return out;
}
}  // namespace

std::string telemetry(std::string_view site, std::string_view worker_id) {
  return join({site, "worker", worker_id, "telemetry"});
}
std::string command(std::string_view site, std::string_view machine_id) {
  return join({site, "machine", machine_id, "cmd"});
}
std::string state(std::string_view site, std::string_view machine_id) {
  return join({site, "machine", machine_id, "state"});
}
std::string heartbeat(std::string_view site) { return join({site, "server", "heartbeat"}); }
std::string device_link(std::string_view site, std::string_view worker_id) {
  return join({site, "worker", worker_id, "frames"});
}
std::string all_telemetry(std::string_view site) { return join({site, "worker", "+", "telemetry"}); }
std::string all_states(std::string_view site) { return join({site, "machine", "+", "state"}); }

std::string entity_id(std::string_view topic) {
  const auto levels = split_levels(topic);
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    if (levels[i] == "worker" || levels[i] == "machine") return std::string(levels[i + 1]);
  }
  return {};
}

}  // namespace topics

}  // namespace swsk::bus
