#include "swsk/engine/session.hpp"

#include <cmath>

namespace swsk::engine {

namespace {

template <typename Range, typename Field>
std::optional<double> mean_of(const Range& samples, Field field) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (const auto& v = s.*field) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

VirtualMs ms(double seconds) { return static_cast<VirtualMs>(std::llround(seconds * 1000.0)); }

}  // namespace

WorkerSession::WorkerSession(EngineConfig config, std::string worker_id, VirtualMs started_at)
    : config_(std::move(config)),
      worker_id_(std::move(worker_id)),
      started_at_(started_at),
      monitor_(config_, worker_id_),
      next_step_(started_at + ms(config_.step_s)) {}

WindowStats WorkerSession::window_stats() const {
  return WindowStats{mean_of(window_, &Sample::hr), mean_of(window_, &Sample::gsr), mean_of(window_, &Sample::temp)};
}

StressAssessment WorkerSession::assess(VirtualMs now) {
  if (!baseline_ && now >= started_at_ + ms(config_.calibration_s)) {
    baseline_ = Baseline{mean_of(calibration_, &Sample::hr), mean_of(calibration_, &Sample::gsr),
                         mean_of(calibration_, &Sample::temp)};
    calibration_.clear();
  }
  while (!window_.empty() && window_.front().ts <= now - ms(config_.window_s)) window_.pop_front();
  return compute_stress(window_stats(), baseline_, config_);
}

SessionUpdate WorkerSession::ingest(const telemetry::WorkerTelemetry& t) {
  SessionUpdate u;
  const auto& v = t.frame.vitals;
  const Sample s{t.recv_ts, v.hr, v.gsr_us, v.body_temp_c};
  if (!baseline_ && t.recv_ts < started_at_ + ms(config_.calibration_s)) calibration_.push_back(s);

  // Close any step boundaries passed before this sample, then add it.
  std::optional<VirtualMs> due;
  while (t.recv_ts >= next_step_) {
    due = next_step_;
    next_step_ += ms(config_.step_s);
  }
  if (due) {
    latest_ = assess(*due);
    u.assessment = latest_;
  }
  window_.push_back(s);

  u.onsets = monitor_.on_sample(t);
  if (u.assessment) {
    auto more = monitor_.on_assessment(*u.assessment, t.recv_ts);
    u.onsets.insert(u.onsets.end(), more.begin(), more.end());
  }
  return u;
}

}  // namespace swsk::engine
