#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "swsk/core/time.hpp"
#include "swsk/engine/alerts.hpp"
#include "swsk/engine/config.hpp"
#include "swsk/engine/stress.hpp"
#include "swsk/telemetry/telemetry.hpp"

namespace swsk::engine {

struct SessionUpdate {
  std::vector<Alert> onsets;
  std::optional<StressAssessment> assessment;  // set on step boundaries
};

// One worker's engine state from registration on: calibration baseline,
// sliding window, rule monitor. Timing uses the server receive timestamp.
class WorkerSession {
 public:
  WorkerSession(EngineConfig config, std::string worker_id, VirtualMs started_at);

  SessionUpdate ingest(const telemetry::WorkerTelemetry& t);

  const std::string& worker_id() const { return worker_id_; }
  VirtualMs started_at() const { return started_at_; }
  const std::optional<Baseline>& baseline() const { return baseline_; }
  const StressAssessment& latest() const { return latest_; }
  const ThresholdMonitor& monitor() const { return monitor_; }
  bool critical_active() const { return monitor_.critical_active(); }

  /// Mean of the valid samples currently in the window.
  WindowStats window_stats() const;

 private:
  struct Sample {
    VirtualMs ts;
    std::optional<double> hr, gsr, temp;
  };

  StressAssessment assess(VirtualMs now);

  EngineConfig config_;
  std::string worker_id_;
  VirtualMs started_at_;
  ThresholdMonitor monitor_;
  std::vector<Sample> calibration_;
  std::optional<Baseline> baseline_;
  std::deque<Sample> window_;
  VirtualMs next_step_;
  StressAssessment latest_;
};

}  // namespace swsk::engine
