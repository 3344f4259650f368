#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace swsk::telemetry {

// Risk graph inputs: injury severity, exposure frequency, possibility of avoidance.
enum class Severity : std::uint8_t { S1, S2 };
enum class Frequency : std::uint8_t { F1, F2 };
enum class Avoidance : std::uint8_t { P1, P2 };

struct RiskParams {
  Severity severity = Severity::S1;
  Frequency frequency = Frequency::F1;
  Avoidance avoidance = Avoidance::P1;

  friend bool operator==(const RiskParams&, const RiskParams&) = default;
};

// Required performance level; enumerator order is the risk order (a lowest).
enum class RiskClass : std::uint8_t { a, b, c, d, e };

inline constexpr int kRiskClassCount = 5;

std::string_view to_string(Severity s);
std::string_view to_string(Frequency f);
std::string_view to_string(Avoidance p);
std::string_view to_string(RiskClass c);

std::optional<Severity> parse_severity(std::string_view s);
std::optional<Frequency> parse_frequency(std::string_view s);
std::optional<Avoidance> parse_avoidance(std::string_view s);
std::optional<RiskClass> parse_risk_class(std::string_view s);

}  // namespace swsk::telemetry
