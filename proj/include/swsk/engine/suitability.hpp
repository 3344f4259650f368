#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swsk/engine/stress.hpp"
#include "swsk/telemetry/risk.hpp"

namespace swsk::engine {

using telemetry::RiskClass;
using telemetry::RiskParams;

/// Risk graph: S1F1P1 a, S1F1P2 b, S1F2P1 b, S1F2P2 c, S2F1P1 c, S2F1P2 d, S2F2P1 d, S2F2P2 e.
RiskClass classify_risk(const RiskParams& params);

/// Highest machine risk a worker at this level may operate; nullopt at L4.
std::optional<RiskClass> max_allowed_risk(StressLevel level);

struct SuitabilityVerdict {
  bool allowed = false;
  std::optional<RiskClass> max_allowed;
  StressLevel stress_level = StressLevel::L0;
  RiskClass machine_risk = RiskClass::a;
  std::vector<std::string> reasons;
};

SuitabilityVerdict assess_suitability(StressLevel level, RiskClass machine_risk);

nlohmann::json to_json(const SuitabilityVerdict& v);

}  // namespace swsk::engine
