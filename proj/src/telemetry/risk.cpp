#include "swsk/telemetry/risk.hpp"

namespace swsk::telemetry {

std::string_view to_string(Severity s) { return s == Severity::S1 ? "S1" : "S2"; }
std::string_view to_string(Frequency f) { return f == Frequency::F1 ? "F1" : "F2"; }
std::string_view to_string(Avoidance p) { return p == Avoidance::P1 ? "P1" : "P2"; }

std::string_view to_string(RiskClass c) {
  switch (c) {
    case RiskClass::a: return "a";
    case RiskClass::b: return "b";
    case RiskClass::c: return "c";
    case RiskClass::d: return "d";
    case RiskClass::e: return "e";
  }
  return "?";
}

std::optional<Severity> parse_severity(std::string_view s) {
  if (s == "S1") return Severity::S1;
  if (s == "S2") return Severity::S2;
  return std::nullopt;
}

std::optional<Frequency> parse_frequency(std::string_view s) {
  if (s == "F1") return Frequency::F1;
  if (s == "F2") return Frequency::F2;
  return std::nullopt;
}

std::optional<Avoidance> parse_avoidance(std::string_view s) {
  if (s == "P1") return Avoidance::P1;
  if (s == "P2") return Avoidance::P2;
  return std::nullopt;
}

std::optional<RiskClass> parse_risk_class(std::string_view s) {
  if (s.size() != 1) return std::nullopt;
  switch (s[0]) {
    case 'a': case 'A': return RiskClass::a;
    case 'b': case 'B': return RiskClass::b;
    case 'c': case 'C': return RiskClass::c;
    case 'd': case 'D': return RiskClass::d;
    case 'e': case 'E': return RiskClass::e;
    default: return std::nullopt;
  }
}

}  // namespace swsk::telemetry
