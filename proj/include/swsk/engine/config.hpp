#pragma once

#include <array>
#include <string>

#include <nlohmann/json.hpp>

namespace swsk::engine {

struct StressWeights {
  double hr = 0.50;
  double gsr = 0.35;
  double temp = 0.15;
};

struct Saturation {
  double hr_dev = 0.5;           // relative HR rise that saturates the component
  double gsr_dev = 1.0;          // relative GSR rise
  double temp_excess = 1.3;      // degC above temp_reference
  double temp_reference = 37.2;  // degC
};

struct VitalThresholds {
  double hr_low = 40;
  double hr_high = 150;
  double spo2_crit = 90;
  double spo2_warn = 94;
  double temp_high = 39.0;
  double temp_low = 35.0;
  double sustain_s = 10;
};

struct EnvThresholds {
  double co2_warn = 1000;
  double co2_crit = 5000;
  double amb_high = 45;
  double amb_low = -10;
  double sound_warn = 85;
};

struct MotionRule {
  bool enabled = true;
  double impact_mag = 29.4;     // m/s^2, about 3 g
  double inactivity_s = 60;
  double still_tolerance = 0.5; // |mag - g| below this counts as still
};

inline constexpr double kStandardGravity = 9.81;  // m/s^2

struct EngineConfig {
  double calibration_s = 120;
  double window_s = 30;
  double step_s = 5;
  StressWeights weights;
  Saturation saturation;
  std::array<double, 4> level_cuts{0.2, 0.4, 0.6, 0.8};
  VitalThresholds vitals;
  EnvThresholds env;
  MotionRule motion;

  /// Throws SchemaError naming the offending member under `path`.
  void validate(const std::string& path = "engine") const;
};

/// Missing members keep their defaults; unknown members are rejected.
EngineConfig engine_config_from_json(const nlohmann::json& j, const std::string& path = "engine");
nlohmann::json to_json(const EngineConfig& c);

}  // namespace swsk::engine
