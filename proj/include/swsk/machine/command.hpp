#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "swsk/core/random.hpp"
#include "swsk/core/time.hpp"
#include "swsk/engine/planner.hpp"

namespace swsk::machine {

using engine::CommandSource;

enum class CommandType : std::uint8_t { Estop, Reset };

std::string_view to_string(CommandType t);

// Payload on .../machine/{id}/cmd:
// {"cmd_id": 32 hex digits, "type": "ESTOP"|"RESET", "issued_at": ms,
//  "reason": text, "source": "auto"|"operator"|"device_button"}
struct EstopCommand {
  std::string cmd_id;
  CommandType type = CommandType::Estop;
  VirtualMs issued_at = 0;
  std::string reason;
  CommandSource source = CommandSource::Auto;

  friend bool operator==(const EstopCommand&, const EstopCommand&) = default;
};

/// 128 random bits as 32 lowercase hex digits.
std::string make_cmd_id(Rng& rng);
bool is_valid_cmd_id(std::string_view id);

nlohmann::json to_json(const EstopCommand& c);
/// Throws SchemaError.
EstopCommand command_from_json(const nlohmann::json& j);

}  // namespace swsk::machine
