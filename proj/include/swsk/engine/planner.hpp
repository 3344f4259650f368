#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "swsk/core/time.hpp"
#include "swsk/engine/alerts.hpp"
#include "swsk/engine/stress.hpp"

namespace swsk::engine {

enum class CommandSource : std::uint8_t { Auto, Operator, DeviceButton };

std::string_view to_string(CommandSource s);
std::optional<CommandSource> parse_command_source(std::string_view s);

struct PlannedEstop {
  std::string machine_id;
  std::string worker_id;
  CommandSource source = CommandSource::Auto;
  std::string reason;

  friend bool operator==(const PlannedEstop&, const PlannedEstop&) = default;
};

struct Notification {
  std::string worker_id;
  AlertSeverity severity = AlertSeverity::Warn;
  std::string code;  // alert code or server condition, e.g. "ESTOP_UNCONFIRMED"
  std::string text;
  VirtualMs ts = 0;

  friend bool operator==(const Notification&, const Notification&) = default;
};

nlohmann::json to_json(const Notification& n);
Notification notification_from_json(const nlohmann::json& j);

struct Plan {
  std::vector<PlannedEstop> commands;
  std::vector<Notification> notifications;
};

// Machines already stopped during the worker's current alert episode. The
// episode lasts while any CRITICAL condition or L4 holds.
struct EpisodeState {
  std::set<std::string> stopped;
};

// New onsets: WARN notifies; CRITICAL (or L4) e-stops the assigned machine
// once per episode, or notifies when the worker has no machine.
Plan plan_actions(const std::vector<Alert>& onsets, const StressAssessment* assessment,
                  const std::optional<std::string>& assigned_machine, bool critical_active, EpisodeState& episode,
                  std::string_view worker_id = {});

struct PolicyInput {
  std::string worker_id;
  VirtualMs now = 0;
  const std::vector<Alert>& onsets;
  const StressAssessment* assessment = nullptr;
  std::optional<std::string> assigned_machine;
  bool critical_active = false;
};

// Seam for replacing the rule set with another decision procedure.
class DecisionPolicy {
 public:
  virtual ~DecisionPolicy() = default;
  virtual std::string_view name() const = 0;
  virtual Plan decide(const PolicyInput& input) = 0;
  /// Drops per-worker state, e.g. on re-registration.
  virtual void reset(const std::string& worker_id) = 0;
};

class RuleBasedPolicy final : public DecisionPolicy {
 public:
  std::string_view name() const override { return "rules"; }
  Plan decide(const PolicyInput& input) override;
  void reset(const std::string& worker_id) override { episodes_.erase(worker_id); }

 private:
  std::map<std::string, EpisodeState> episodes_;
};

}  // namespace swsk::engine
