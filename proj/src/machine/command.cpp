#include "swsk/machine/command.hpp"

#include <cstdio>

#include "swsk/core/json_reader.hpp"

namespace swsk::machine {

std::string_view to_string(CommandType t) { return t == CommandType::Estop ? "ESTOP" : "RESET"; }

std::string make_cmd_id(Rng& rng) {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng.next_u64()),
                static_cast<unsigned long long>(rng.next_u64()));
  return buf;
}

bool is_valid_cmd_id(std::string_view id) {
  if (id.size() != 32) return false;
  for (char c : id) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

nlohmann::json to_json(const EstopCommand& c) {
  return {{"cmd_id", c.cmd_id},
          {"type", to_string(c.type)},
          {"issued_at", c.issued_at},
          {"reason", c.reason},
          {"source", engine::to_string(c.source)}};
}

EstopCommand command_from_json(const nlohmann::json& j) {
  JsonReader r(j, "command");
  r.only({"cmd_id", "type", "issued_at", "reason", "source"});
  EstopCommand c;
  c.cmd_id = r.string("cmd_id");
  if (!is_valid_cmd_id(c.cmd_id)) r.fail("cmd_id", "expected 32 lowercase hex digits");
  const auto type = r.string("type");
  if (type == "ESTOP") {
    c.type = CommandType::Estop;
  } else if (type == "RESET") {
    c.type = CommandType::Reset;
  } else {
    r.fail("type", "expected ESTOP or RESET");
  }
  c.issued_at = r.integer("issued_at", 0);
  c.reason = r.string("reason", "");
  auto source = engine::parse_command_source(r.string("source"));
  if (!source) r.fail("source", "expected auto, operator or device_button");
  c.source = *source;
  return c;
}

}  // namespace swsk::machine
