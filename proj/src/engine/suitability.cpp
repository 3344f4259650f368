#include "swsk/engine/suitability.hpp"

namespace swsk::engine {

using telemetry::Avoidance;
using telemetry::Frequency;
using telemetry::Severity;

RiskClass classify_risk(const RiskParams& p) {
  // Indexed [S][F][P].
  static constexpr RiskClass table[2][2][2] = {
      {{RiskClass::a, RiskClass::b}, {RiskClass::b, RiskClass::c}},
      {{RiskClass::c, RiskClass::d}, {RiskClass::d, RiskClass::e}},
  };
  return table[p.severity == Severity::S2][p.frequency == Frequency::F2][p.avoidance == Avoidance::P2];
}

std::optional<RiskClass> max_allowed_risk(StressLevel level) {
  switch (level) {
    case StressLevel::L0: return RiskClass::e;
    case StressLevel::L1: return RiskClass::d;
    case StressLevel::L2: return RiskClass::c;
    case StressLevel::L3: return RiskClass::b;
    case StressLevel::L4: return std::nullopt;
  }
  return std::nullopt;
}

SuitabilityVerdict assess_suitability(StressLevel level, RiskClass machine_risk) {
  SuitabilityVerdict v;
  v.stress_level = level;
  v.machine_risk = machine_risk;
  v.max_allowed = max_allowed_risk(level);
  v.allowed = v.max_allowed && machine_risk <= *v.max_allowed;
  if (!v.max_allowed) {
    v.reasons.push_back("stress level " + std::string(to_string(level)) + " permits no machine work");
  } else if (!v.allowed) {
    v.reasons.push_back("machine risk " + std::string(to_string(machine_risk)) + " exceeds " +
                        std::string(to_string(*v.max_allowed)) + " allowed at stress level " +
                        std::string(to_string(level)));
  }
  return v;
}

nlohmann::json to_json(const SuitabilityVerdict& v) {
  return {{"allowed", v.allowed},
          {"max_allowed", v.max_allowed ? nlohmann::json(to_string(*v.max_allowed)) : nlohmann::json("NONE")},
          {"stress_level", to_string(v.stress_level)},
          {"machine_risk", to_string(v.machine_risk)},
          {"reasons", v.reasons}};
}

}  // namespace swsk::engine
