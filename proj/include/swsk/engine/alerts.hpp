#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "swsk/core/time.hpp"
#include "swsk/engine/config.hpp"
#include "swsk/engine/stress.hpp"
#include "swsk/telemetry/telemetry.hpp"

namespace swsk::engine {

enum class AlertSeverity : std::uint8_t { Warn, Critical };

enum class AlertCode : std::uint8_t {
  VitalHr,
  VitalSpo2,
  VitalTemp,
  EnvCo2,
  EnvTemp,
  EnvSound,
  DeviceButton,
  MotionImpact,
  StressL4,
  SensorGap,
};

std::string_view to_string(AlertSeverity s);
std::string_view to_string(AlertCode c);
std::optional<AlertSeverity> parse_alert_severity(std::string_view s);
std::optional<AlertCode> parse_alert_code(std::string_view s);

struct Alert {
  AlertCode code = AlertCode::VitalHr;
  AlertSeverity severity = AlertSeverity::Warn;
  std::string worker_id;
  VirtualMs onset_ts = 0;
  std::string measurement;  // e.g. "spo2", "env.co2", "flags.BUTTON_ESTOP"
  std::optional<double> value;
  std::string detail;

  friend bool operator==(const Alert&, const Alert&) = default;
};

nlohmann::json to_json(const Alert& a);
Alert alert_from_json(const nlohmann::json& j);

// Per-worker rule state. A vital or environment condition raises once it
// has held for sustain_s; a sample covers the interval up to the next one,
// so the 10th consecutive 1 Hz sample completes 10 s. Condition timing uses
// the device clock (frame t_ms), which carries no network jitter. Invalid
// readings leave the condition untouched.
class ThresholdMonitor {
 public:
  ThresholdMonitor(EngineConfig config, std::string worker_id);

  /// New onsets caused by this sample.
  std::vector<Alert> on_sample(const telemetry::WorkerTelemetry& t);
  /// STRESS_L4 and SENSOR_GAP onsets from a stress evaluation at `ts`.
  std::vector<Alert> on_assessment(const StressAssessment& a, VirtualMs ts);

  /// Any CRITICAL condition currently raised and still holding.
  bool critical_active() const;
  /// Raised conditions that still hold, as "CODE:SEVERITY".
  std::vector<std::string> active_conditions() const;

 private:
  struct Tracker {
    std::optional<std::uint32_t> since;  // device ms
    bool raised = false;
  };
  struct Check {
    AlertCode code;
    AlertSeverity severity;
    const char* measurement;
    std::optional<double> value;  // empty: invalid reading
    bool holds;
  };

  Alert make(AlertCode code, AlertSeverity sev, VirtualMs ts, std::string measurement, std::optional<double> value,
             std::string detail) const;
  void check_motion(const telemetry::MotionSample& m, VirtualMs ts, std::vector<Alert>& out);

  EngineConfig config_;
  std::string worker_id_;
  std::map<std::pair<AlertCode, AlertSeverity>, Tracker> trackers_;
  std::optional<std::uint32_t> prev_t_ms_;
  std::uint32_t last_interval_ms_ = 1000;
  bool button_held_ = false;
  std::optional<VirtualMs> last_motion_at_;
  std::optional<VirtualMs> impact_at_;
  double impact_mag_ = 0;
  bool motion_raised_ = false;
  bool l4_ = false;
  std::vector<std::string> gaps_;
};

}  // namespace swsk::engine
