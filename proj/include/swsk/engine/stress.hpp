#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "swsk/engine/config.hpp"

namespace swsk::engine {

enum class StressLevel : std::uint8_t { L0, L1, L2, L3, L4 };

inline constexpr int kStressLevelCount = 5;

std::string_view to_string(StressLevel l);
std::optional<StressLevel> parse_stress_level(std::string_view s);

struct StressComponents {
  double hr = 0;    // normalized, [0, 1]
  double gsr = 0;
  double temp = 0;

  friend bool operator==(const StressComponents&, const StressComponents&) = default;
};

struct StressAssessment {
  double score = 0;  // [0, 1]
  StressLevel level = StressLevel::L0;
  StressComponents components;
  bool calibrating = true;
  /// Fields whose window held no valid sample ("hr", "gsr", "body_temp").
  std::vector<std::string> gaps;

  friend bool operator==(const StressAssessment&, const StressAssessment&) = default;
};

nlohmann::json to_json(const StressAssessment& a);
StressAssessment stress_from_json(const nlohmann::json& j);

// Per-person reference values from the calibration period. A field whose
// calibration samples were all invalid stays empty and contributes nothing.
struct Baseline {
  std::optional<double> hr;
  std::optional<double> gsr_us;
  std::optional<double> body_temp_c;

  friend bool operator==(const Baseline&, const Baseline&) = default;
};

/// Means of the valid samples in the window; empty when there were none.
struct WindowStats {
  std::optional<double> hr;
  std::optional<double> gsr_us;
  std::optional<double> body_temp_c;
};

/// Number of cut-points strictly below the score.
StressLevel level_for(double score, const EngineConfig& config);

/// Weighted sum of min(1, dev / sat) components.
StressAssessment score_from_deviations(double hr_dev, double gsr_dev, double temp_excess, const EngineConfig& config);

// hr_dev = max(0, (HRmean - HRbase) / HRbase), likewise for GSR;
// temp_excess = max(0, Tbody - 37.2). No baseline yields a calibrating L0.
StressAssessment compute_stress(const WindowStats& window, const std::optional<Baseline>& baseline,
                                const EngineConfig& config);

}  // namespace swsk::engine
