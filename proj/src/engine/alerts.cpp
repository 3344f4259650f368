#include "swsk/engine/alerts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swsk/core/json_reader.hpp"

namespace swsk::engine {

namespace {

constexpr std::string_view kCodeNames[] = {"VITAL_HR",    "VITAL_SPO2",    "VITAL_TEMP", "ENV_CO2",  "ENV_TEMP",
                                           "ENV_SOUND",   "DEVICE_BUTTON", "MOTION_IMPACT", "STRESS_L4", "SENSOR_GAP"};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(AlertSeverity s) { return s == AlertSeverity::Warn ? "WARN" : "CRITICAL"; }
std::string_view to_string(AlertCode c) { return kCodeNames[static_cast<int>(c)]; }

std::optional<AlertSeverity> parse_alert_severity(std::string_view s) {
  if (s == "WARN") return AlertSeverity::Warn;
  if (s == "CRITICAL") return AlertSeverity::Critical;
  return std::nullopt;
}

std::optional<AlertCode> parse_alert_code(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kCodeNames); ++i) {
    if (kCodeNames[i] == s) return static_cast<AlertCode>(i);
  }
  return std::nullopt;
}

nlohmann::json to_json(const Alert& a) {
  return {{"code", to_string(a.code)},
          {"severity", to_string(a.severity)},
          {"worker_id", a.worker_id},
          {"onset_ts", a.onset_ts},
          {"measurement", a.measurement},
          {"value", a.value ? nlohmann::json(*a.value) : nlohmann::json(nullptr)},
          {"detail", a.detail}};
}

Alert alert_from_json(const nlohmann::json& j) {
  JsonReader r(j, "alert");
  Alert a;
  auto code = parse_alert_code(r.string("code"));
  if (!code) r.fail("code", "unknown alert code");
  auto sev = parse_alert_severity(r.string("severity"));
  if (!sev) r.fail("severity", "unknown severity");
  a.code = *code;
  a.severity = *sev;
  a.worker_id = r.string("worker_id");
  a.onset_ts = r.integer("onset_ts");
  a.measurement = r.string("measurement", "");
  a.value = r.optional_number("value");
  a.detail = r.string("detail", "");
  return a;
}

ThresholdMonitor::ThresholdMonitor(EngineConfig config, std::string worker_id)
    : config_(std::move(config)), worker_id_(std::move(worker_id)) {}

Alert ThresholdMonitor::make(AlertCode code, AlertSeverity sev, VirtualMs ts, std::string measurement,
                             std::optional<double> value, std::string detail) const {
  return Alert{code, sev, worker_id_, ts, std::move(measurement), value, std::move(detail)};
}

std::vector<Alert> ThresholdMonitor::on_sample(const telemetry::WorkerTelemetry& t) {
  using enum AlertCode;
  constexpr auto W = AlertSeverity::Warn;
  constexpr auto C = AlertSeverity::Critical;
  const auto& v = t.frame.vitals;
  const auto& e = t.frame.env;
  const auto& vt = config_.vitals;
  const auto& et = config_.env;

  const std::uint32_t now = t.frame.t_ms;
  if (prev_t_ms_ && now > *prev_t_ms_) last_interval_ms_ = now - *prev_t_ms_;
  prev_t_ms_ = now;

  const Check checks[] = {
      {VitalHr, C, "hr", v.hr, v.hr && (*v.hr < vt.hr_low || *v.hr > vt.hr_high)},
      {VitalSpo2, C, "spo2", v.spo2, v.spo2 && *v.spo2 < vt.spo2_crit},
      {VitalSpo2, W, "spo2", v.spo2, v.spo2 && *v.spo2 < vt.spo2_warn},
      {VitalTemp, C, "body_temp_c", v.body_temp_c,
       v.body_temp_c && (*v.body_temp_c > vt.temp_high || *v.body_temp_c < vt.temp_low)},
      {EnvCo2, C, "env.co2", e.co2, e.co2 >= et.co2_crit},
      {EnvCo2, W, "env.co2", e.co2, e.co2 >= et.co2_warn},
      {EnvTemp, W, "env.amb_temp_c", e.amb_temp_c, e.amb_temp_c > et.amb_high || e.amb_temp_c < et.amb_low},
      {EnvSound, W, "env.sound", e.sound, e.sound >= et.sound_warn},
  };

  const auto sustain_ms = static_cast<std::int64_t>(std::llround(vt.sustain_s * 1000.0));
  std::vector<Alert> out;
  for (const auto& c : checks) {
    if (!c.value) continue;
    auto& tr = trackers_[{c.code, c.severity}];
    if (!c.holds) {
      tr = Tracker{};
      continue;
    }
    if (!tr.since) tr.since = now;
    const std::int64_t held = static_cast<std::int64_t>(now) - *tr.since + last_interval_ms_;
    if (tr.raised || held < sustain_ms) continue;
    tr.raised = true;
    if (c.severity == W) {
      const auto crit = trackers_.find({c.code, C});
      if (crit != trackers_.end() && crit->second.raised) continue;
    }
    out.push_back(make(c.code, c.severity, t.recv_ts, c.measurement, c.value,
                       std::string(c.measurement) + "=" + fmt(*c.value) + " held " + fmt(held / 1000.0) + " s"));
  }
  // A WARN and CRITICAL of the same code raised together: keep the CRITICAL.
  std::erase_if(out, [&](const Alert& a) {
    return a.severity == W && std::any_of(out.begin(), out.end(), [&](const Alert& b) {
             return b.code == a.code && b.severity == C;
           });
  });

  const bool button = t.frame.flags.test(telemetry::FrameFlag::ButtonEstop);
  if (button && !button_held_) {
    out.push_back(make(DeviceButton, C, t.recv_ts, "flags.BUTTON_ESTOP", 1.0,
                       "wearable emergency button pressed (device seq " + std::to_string(t.frame.seq) + ")"));
  }
  button_held_ = button;

  if (config_.motion.enabled && t.motion) check_motion(*t.motion, t.recv_ts, out);
  return out;
}

void ThresholdMonitor::check_motion(const telemetry::MotionSample& m, VirtualMs ts, std::vector<Alert>& out) {
  // The gateway attaches its latest sample to every frame; look at each once.
  if (last_motion_at_ && m.sampled_at <= *last_motion_at_) return;
  last_motion_at_ = m.sampled_at;

  const auto& rule = config_.motion;
  if (m.magnitude >= rule.impact_mag) {
    impact_at_ = m.sampled_at;
    impact_mag_ = m.magnitude;
    motion_raised_ = false;
    return;
  }
  if (!impact_at_) return;
  if (std::abs(m.magnitude - kStandardGravity) > rule.still_tolerance) {
    impact_at_.reset();
    motion_raised_ = false;
    return;
  }
  const auto still_ms = static_cast<VirtualMs>(std::llround(rule.inactivity_s * 1000.0));
  if (!motion_raised_ && m.sampled_at - *impact_at_ >= still_ms) {
    motion_raised_ = true;
    out.push_back(make(AlertCode::MotionImpact, AlertSeverity::Critical, ts, "motion.mag", impact_mag_,
                       "impact of " + fmt(impact_mag_) + " m/s^2 followed by " + fmt(rule.inactivity_s) +
                           " s without movement"));
  }
}

std::vector<Alert> ThresholdMonitor::on_assessment(const StressAssessment& a, VirtualMs ts) {
  std::vector<Alert> out;
  if (a.calibrating) return out;
  const bool l4 = a.level == StressLevel::L4;
  if (l4 && !l4_) {
    out.push_back(make(AlertCode::StressL4, AlertSeverity::Critical, ts, "stress_score", a.score,
                       "stress score " + fmt(a.score) + " reached L4"));
  }
  l4_ = l4;
  for (const auto& g : a.gaps) {
    if (std::find(gaps_.begin(), gaps_.end(), g) == gaps_.end()) {
      out.push_back(make(AlertCode::SensorGap, AlertSeverity::Warn, ts, g, std::nullopt,
                         "no valid " + g + " samples in the stress window"));
    }
  }
  gaps_ = a.gaps;
  return out;
}

bool ThresholdMonitor::critical_active() const {
  for (const auto& [key, tr] : trackers_) {
    if (key.second == AlertSeverity::Critical && tr.raised) return true;
  }
  return button_held_ || motion_raised_ || l4_;
}

std::vector<std::string> ThresholdMonitor::active_conditions() const {
  std::vector<std::string> out;
  auto add = [&](AlertCode c, AlertSeverity s) { out.push_back(std::string(to_string(c)) + ":" + std::string(to_string(s))); };
  for (const auto& [key, tr] : trackers_) {
    if (tr.raised) add(key.first, key.second);
  }
  if (button_held_) add(AlertCode::DeviceButton, AlertSeverity::Critical);
  if (motion_raised_) add(AlertCode::MotionImpact, AlertSeverity::Critical);
  if (l4_) add(AlertCode::StressL4, AlertSeverity::Critical);
  for (const auto& g : gaps_) {
    (void)g;
    add(AlertCode::SensorGap, AlertSeverity::Warn);
  }
  return out;
}

}  // namespace swsk::engine
