#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace swsk::device {

struct WorkerProfile {
  double hr_base = 72.0;          // bpm, [40, 120]
  double gsr_base = 5.0;          // uS, > 0
  double body_temp_base = 36.6;   // degC
  double spo2_base = 98.0;        // percent, [90, 100]

  /// Throws SchemaError with `path` prefix.
  void validate(const std::string& path = "profile") const;
};

enum class SensorField : std::uint8_t { Hr, Spo2, BodyTemp, Gsr };

std::string_view to_string(SensorField f);

// Segment kinds. Times are seconds since scenario start.
struct StressEpisode {
  double start_s = 0, end_s = 0, intensity = 0;  // intensity in [0, 1]
};
// Linear from the preceding level to target over [start, end], then held.
struct Co2Ramp {
  double start_s = 0, end_s = 0, target_ppm = 0;
};
// Step change of ambient temperature from start onwards.
struct TempShift {
  double start_s = 0, delta_c = 0;
};
// SpO2 descends linearly toward target over the first ramp seconds,
// holds while active, and returns to baseline at end.
struct Spo2Drop {
  double start_s = 0, end_s = 0, target_pct = 0;
};
struct ButtonPress {
  double at_s = 0;
};
// Field reads its invalid sentinel from at_s until until_s (or the end).
struct SensorFault {
  double at_s = 0;
  SensorField field = SensorField::Hr;
  std::optional<double> until_s;
};
// Phone IMU: an impact spike followed by stillness.
struct Fall {
  double at_s = 0;
  double peak_mag = 35.0;  // m/s^2
  double still_s = 90.0;
};
// Link fault override for a named link, interpreted by the system simulation.
struct LinkFaultWindow {
  std::string link;
  double start_s = 0, end_s = 0;
  std::optional<double> drop_prob;  // absent: full partition
};

using Segment = std::variant<StressEpisode, Co2Ramp, TempShift, Spo2Drop, ButtonPress, SensorFault, Fall, LinkFaultWindow>;

struct Ambient {
  double amb_temp_c = 22.0;
  double humidity = 45.0;
  double co2_ppm = 400.0;
  double light_lux = 300.0;
  double sound_db = 50.0;
  double voc_ppb = 100.0;
};

struct NoiseConfig {
  double sigma_hr = 1.0;     // bpm
  double sigma_gsr = 0.05;   // uS
  double sigma_temp = 0.05;  // degC
};

struct ScenarioScript {
  std::uint64_t seed = 0;
  double duration_s = 60.0;
  double sample_rate_hz = 1.0;
  std::vector<Segment> segments;
  Ambient ambient;
  NoiseConfig noise;
  double battery_start = 100.0;
  double battery_drain_per_hour = 6.0;

  /// Throws SchemaError: segment times outside the duration, intensity
  /// outside [0, 1], non-positive rate, and similar.
  void validate(const std::string& path = "scenario") const;

  template <typename T>
  std::vector<T> segments_of() const {
    std::vector<T> out;
    for (const auto& s : segments) {
      if (const auto* p = std::get_if<T>(&s)) out.push_back(*p);
    }
    return out;
  }
};

/// Seconds of linear rise at the start of stress episodes and SpO2 drops.
inline constexpr double kRampSeconds = 10.0;

// JSON form: {"seed", "duration_s", "sample_rate_hz", "ambient": {...},
// "noise": {...}, "segments": [{"kind": "stress_episode", ...}, ...]}.
// `defaults` supplies seed/duration/rate inherited from an enclosing document.
ScenarioScript scenario_from_json(const nlohmann::json& j, const std::string& path,
                                  const ScenarioScript& defaults = {});
WorkerProfile profile_from_json(const nlohmann::json& j, const std::string& path);

nlohmann::json to_json(const Segment& s);

}  // namespace swsk::device
