#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swsk/core/random.hpp"
#include "swsk/core/time.hpp"
#include "swsk/device/scenario.hpp"
#include "swsk/telemetry/frame.hpp"
#include "swsk/telemetry/telemetry.hpp"

namespace swsk::device {

class OutOfScenario : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Continuous signal values at one instant, before quantization.
struct SignalSample {
  double hr = 0;
  double gsr_us = 0;
  double body_temp_c = 0;
  double spo2 = 0;
  double amb_temp_c = 0;
  double humidity = 0;
  double co2 = 0;
  double light = 0;
  double sound = 0;
  double voc = 0;
  double battery = 0;
};

/// Active stress drive I(t) * ramp in [0, 1]; the strongest overlapping episode wins.
double stress_drive(const ScenarioScript& scenario, double t_s);

// hr   = hr_base + 3 sin(2 pi t / 60) + 40 D(t) + N(0, sigma_hr)
// gsr  = gsr_base (1 + D(t)) + N(0, sigma_gsr)
// temp = body_temp_base + 0.3 D(t) + N(0, sigma_temp)
// with D(t) = stress_drive(t). Draws exactly three normals per call, in that
// order, whatever the sigmas are. Throws OutOfScenario outside [0, duration].
SignalSample generate_signals(const WorkerProfile& profile, const ScenarioScript& scenario, double t_s, Rng& rng);

/// Quantized wire frame at t, with button, sensor-fault, battery and LED flags applied.
telemetry::DeviceFrame generate_frame(const WorkerProfile& profile, const ScenarioScript& scenario, double t_s,
                                      Rng& rng, std::uint16_t seq = 0);

struct DeviceAlertState {
  bool led_on = false;
};

/// Device-local indicator: hr outside [40, 150] or spo2 below 90.
DeviceAlertState quick_rules(const telemetry::DeviceFrame& frame);

/// Per-device RNG stream: scenario seed xor FNV-1a(worker_id).
std::uint64_t device_seed(std::uint64_t seed, std::string_view worker_id);

struct Emission {
  VirtualMs t_ms = 0;
  telemetry::DeviceFrame frame;
  telemetry::FrameBytes bytes{};
};

// Steps through a scenario one sample at a time; owns the seq counter and
// the RNG stream of one wearable.
class DeviceSimulator {
 public:
  DeviceSimulator(WorkerProfile profile, ScenarioScript scenario, std::string_view worker_id);

  bool done() const { return index_ >= total_; }
  std::size_t total_frames() const { return total_; }
  /// Virtual time of the next emission.
  VirtualMs next_time_ms() const;
  std::optional<Emission> next();
  const DeviceAlertState& alert_state() const { return alert_; }

 private:
  WorkerProfile profile_;
  ScenarioScript scenario_;
  Rng rng_;
  std::size_t index_ = 0;
  std::size_t total_ = 0;
  std::uint16_t seq_ = 0;
  DeviceAlertState alert_;
};

using FrameSink = std::function<void(const Emission&)>;

/// Runs a whole scenario, handing each emission to `link` in order.
std::vector<Emission> run_device(const ScenarioScript& scenario, const WorkerProfile& profile,
                                 std::string_view worker_id, const FrameSink& link = {});

// Stand-in for the phone's accelerometer: gravity plus handling motion,
// with an impact spike and stillness for each Fall segment.
class ImuSimulator {
 public:
  ImuSimulator(const ScenarioScript& scenario, std::string_view worker_id);
  telemetry::MotionSample sample(double t_s);

 private:
  std::vector<Fall> falls_;
  double period_s_;
  Rng rng_;
};

inline constexpr double kGravity = 9.81;

}  // namespace swsk::device
