#include "swsk/engine/planner.hpp"

#include "swsk/core/json_reader.hpp"

namespace swsk::engine {

std::string_view to_string(CommandSource s) {
  switch (s) {
    case CommandSource::Auto: return "auto";
    case CommandSource::Operator: return "operator";
    case CommandSource::DeviceButton: return "device_button";
  }
  return "auto";
}

std::optional<CommandSource> parse_command_source(std::string_view s) {
  if (s == "auto") return CommandSource::Auto;
  if (s == "operator") return CommandSource::Operator;
  if (s == "device_button") return CommandSource::DeviceButton;
  return std::nullopt;
}

nlohmann::json to_json(const Notification& n) {
  return {{"worker_id", n.worker_id}, {"severity", to_string(n.severity)}, {"code", n.code}, {"text", n.text}, {"ts", n.ts}};
}

Notification notification_from_json(const nlohmann::json& j) {
  JsonReader r(j, "notification");
  Notification n;
  n.worker_id = r.string("worker_id", "");
  auto sev = parse_alert_severity(r.string("severity"));
  if (!sev) r.fail("severity", "unknown severity");
  n.severity = *sev;
  n.code = r.string("code");
  n.text = r.string("text", "");
  n.ts = r.integer("ts", 0);
  return n;
}

Plan plan_actions(const std::vector<Alert>& onsets, const StressAssessment* assessment,
                  const std::optional<std::string>& machine, bool critical_active, EpisodeState& episode,
                  std::string_view worker_id) {
  Plan plan;
  auto stop = [&](CommandSource source, std::string reason) {
    if (!episode.stopped.insert(*machine).second) return;
    plan.commands.push_back(PlannedEstop{*machine, std::string(worker_id), source, std::move(reason)});
  };

  for (const auto& a : onsets) {
    const std::string code(to_string(a.code));
    if (a.severity == AlertSeverity::Warn) {
      plan.notifications.push_back({a.worker_id, a.severity, code, a.detail, a.onset_ts});
    } else if (!machine) {
      plan.notifications.push_back({a.worker_id, a.severity, code, a.detail + " (worker has no assigned machine)", a.onset_ts});
    } else {
      stop(a.code == AlertCode::DeviceButton ? CommandSource::DeviceButton : CommandSource::Auto, code + ": " + a.detail);
    }
  }
  if (assessment && !assessment->calibrating && assessment->level == StressLevel::L4 && machine) {
    stop(CommandSource::Auto, "STRESS_L4: stress level L4");
  }
  // Episode over: the next CRITICAL may stop the machine again.
  if (!critical_active && !(assessment && assessment->level == StressLevel::L4)) episode.stopped.clear();
  return plan;
}

Plan RuleBasedPolicy::decide(const PolicyInput& in) {
  return plan_actions(in.onsets, in.assessment, in.assigned_machine, in.critical_active, episodes_[in.worker_id],
                      in.worker_id);
}

}  // namespace swsk::engine
