#include "swsk/device/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swsk/core/hash.hpp"

namespace swsk::device {

using telemetry::DeviceFrame;
using telemetry::FrameFlag;

namespace {

double lerp(double a, double b, double f) { return a + (b - a) * std::clamp(f, 0.0, 1.0); }

// CO2 level with ramps applied in start order; each ramp starts from the
// level the earlier ramps produced at its start time.
double co2_at(const std::vector<Co2Ramp>& ramps, std::size_t count, double ambient, double t) {
  double level = ambient;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& r = ramps[i];
    if (t < r.start_s) break;
    const double from = co2_at(ramps, i, ambient, r.start_s);
    const double span = r.end_s - r.start_s;
    level = span <= 0 ? r.target_ppm : lerp(from, r.target_ppm, (t - r.start_s) / span);
  }
  return level;
}

template <typename T>
T clamp_round(double v, double lo, double hi) {
  return static_cast<T>(std::clamp(std::round(v), lo, hi));
}

bool fault_active(const ScenarioScript& s, SensorField field, double t) {
  for (const auto& seg : s.segments) {
    const auto* f = std::get_if<SensorFault>(&seg);
    if (f && f->field == field && t >= f->at_s && (!f->until_s || t < *f->until_s)) return true;
  }
  return false;
}

}  // namespace

double stress_drive(const ScenarioScript& scenario, double t) {
  double drive = 0.0;
  for (const auto& seg : scenario.segments) {
    const auto* e = std::get_if<StressEpisode>(&seg);
    if (!e || t < e->start_s || t >= e->end_s) continue;
    const double ramp = std::min(1.0, (t - e->start_s) / kRampSeconds);
    drive = std::max(drive, e->intensity * ramp);
  }
  return drive;
}

SignalSample generate_signals(const WorkerProfile& p, const ScenarioScript& s, double t, Rng& rng) {
  if (!(t >= 0.0 && t <= s.duration_s)) {
    throw OutOfScenario("t=" + std::to_string(t) + " outside scenario duration " + std::to_string(s.duration_s));
  }
  const double n_hr = rng.normal();
  const double n_gsr = rng.normal();
  const double n_temp = rng.normal();

  const double drive = stress_drive(s, t);
  SignalSample out;
  out.hr = p.hr_base + 3.0 * std::sin(2.0 * std::numbers::pi * t / 60.0) + 40.0 * drive + s.noise.sigma_hr * n_hr;
  out.gsr_us = p.gsr_base * (1.0 + 1.0 * drive) + s.noise.sigma_gsr * n_gsr;
  out.body_temp_c = p.body_temp_base + 0.3 * drive + s.noise.sigma_temp * n_temp;

  out.spo2 = p.spo2_base;
  for (const auto& seg : s.segments) {
    const auto* d = std::get_if<Spo2Drop>(&seg);
    if (d && t >= d->start_s && t < d->end_s) out.spo2 = lerp(p.spo2_base, d->target_pct, (t - d->start_s) / kRampSeconds);
  }

  auto ramps = s.segments_of<Co2Ramp>();
  std::stable_sort(ramps.begin(), ramps.end(), [](const Co2Ramp& a, const Co2Ramp& b) { return a.start_s < b.start_s; });
  out.co2 = co2_at(ramps, ramps.size(), s.ambient.co2_ppm, t);

  out.amb_temp_c = s.ambient.amb_temp_c;
  for (const auto& shift : s.segments_of<TempShift>()) {
    if (t >= shift.start_s) out.amb_temp_c += shift.delta_c;
  }
  out.humidity = s.ambient.humidity;
  out.light = s.ambient.light_lux;
  out.sound = s.ambient.sound_db;
  out.voc = s.ambient.voc_ppb;
  out.battery = std::max(0.0, s.battery_start - s.battery_drain_per_hour * t / 3600.0);
  return out;
}

DeviceAlertState quick_rules(const DeviceFrame& f) {
  const bool hr_abnormal = f.hr_valid() && (f.hr < 40 || f.hr > 150);
  const bool spo2_low = f.spo2_valid() && f.spo2 < 90;
  return DeviceAlertState{hr_abnormal || spo2_low};
}

DeviceFrame generate_frame(const WorkerProfile& p, const ScenarioScript& s, double t, Rng& rng, std::uint16_t seq) {
  const auto sig = generate_signals(p, s, t, rng);

  DeviceFrame f;
  f.seq = seq;
  f.t_ms = static_cast<std::uint32_t>(std::llround(t * 1000.0));
  f.hr = clamp_round<std::uint8_t>(sig.hr, 25, 250);
  f.spo2 = clamp_round<std::uint8_t>(sig.spo2, 70, 100);
  f.body_temp = clamp_round<std::uint16_t>(sig.body_temp_c * 100.0, 3000, 4300);
  f.gsr = clamp_round<std::uint16_t>(sig.gsr_us * 100.0, 0, 0xFFFE);
  f.amb_temp = clamp_round<std::int16_t>(sig.amb_temp_c * 100.0, -32768, 32767);
  f.humidity = clamp_round<std::uint8_t>(sig.humidity, 0, 100);
  f.light = clamp_round<std::uint16_t>(sig.light, 0, 65535);
  f.co2 = clamp_round<std::uint16_t>(sig.co2, 0, 65535);
  f.voc = clamp_round<std::uint16_t>(sig.voc, 0, 65535);
  f.sound = clamp_round<std::uint8_t>(sig.sound, 0, 255);
  f.battery = clamp_round<std::uint8_t>(sig.battery, 0, 100);

  bool faulted = false;
  auto apply_fault = [&](SensorField field, auto&& invalidate) {
    if (fault_active(s, field, t)) {
      invalidate();
      faulted = true;
    }
  };
  apply_fault(SensorField::Hr, [&] { f.hr = 0; });
  apply_fault(SensorField::Spo2, [&] { f.spo2 = 0; });
  apply_fault(SensorField::BodyTemp, [&] { f.body_temp = telemetry::kInvalidU16; });
  apply_fault(SensorField::Gsr, [&] { f.gsr = telemetry::kInvalidU16; });
  f.flags.set(FrameFlag::SensorFault, faulted);

  const double period = 1.0 / s.sample_rate_hz;
  for (const auto& press : s.segments_of<ButtonPress>()) {
    if (press.at_s >= t && press.at_s < t + period) f.flags.set(FrameFlag::ButtonEstop);
  }
  f.flags.set(FrameFlag::LowBattery, f.battery < 20);
  f.flags.set(FrameFlag::AlertLedOn, quick_rules(f).led_on);
  return f;
}

std::uint64_t device_seed(std::uint64_t seed, std::string_view worker_id) { return seed ^ fnv1a64(worker_id); }

DeviceSimulator::DeviceSimulator(WorkerProfile profile, ScenarioScript scenario, std::string_view worker_id)
    : profile_(profile), scenario_(std::move(scenario)), rng_(device_seed(scenario_.seed, worker_id)) {
  profile_.validate();
  scenario_.validate();
  // Samples at k / rate for every k with k / rate < duration.
  total_ = static_cast<std::size_t>(std::ceil(scenario_.duration_s * scenario_.sample_rate_hz - 1e-9));
}

VirtualMs DeviceSimulator::next_time_ms() const {
  return static_cast<VirtualMs>(std::llround(static_cast<double>(index_) * 1000.0 / scenario_.sample_rate_hz));
}

std::optional<Emission> DeviceSimulator::next() {
  if (done()) return std::nullopt;
  const double t = static_cast<double>(index_) / scenario_.sample_rate_hz;
  Emission e;
  e.t_ms = next_time_ms();
  e.frame = generate_frame(profile_, scenario_, t, rng_, seq_);
  e.bytes = telemetry::encode_frame(e.frame);
  alert_ = quick_rules(e.frame);
  ++seq_;
  ++index_;
  return e;
}

std::vector<Emission> run_device(const ScenarioScript& scenario, const WorkerProfile& profile,
                                 std::string_view worker_id, const FrameSink& link) {
  DeviceSimulator sim(profile, scenario, worker_id);
  std::vector<Emission> log;
  log.reserve(sim.total_frames());
  while (auto e = sim.next()) {
    if (link) link(*e);
    log.push_back(std::move(*e));
  }
  return log;
}

ImuSimulator::ImuSimulator(const ScenarioScript& scenario, std::string_view worker_id)
    : falls_(scenario.segments_of<Fall>()),
      period_s_(1.0 / scenario.sample_rate_hz),
      rng_(device_seed(scenario.seed, worker_id) ^ fnv1a64("imu")) {}

telemetry::MotionSample ImuSimulator::sample(double t) {
  const double n1 = rng_.normal();
  const double n2 = rng_.normal();
  const double n3 = rng_.normal();
  const auto at = static_cast<VirtualMs>(std::llround(t * 1000.0));
  for (const auto& fall : falls_) {
    if (t >= fall.at_s && t < fall.at_s + period_s_) {
      return *telemetry::MotionSample::make(0.0, 0.0, fall.peak_mag, at);
    }
    if (t >= fall.at_s + period_s_ && t < fall.at_s + period_s_ + fall.still_s) {
      return *telemetry::MotionSample::make(0.02 * n1, 0.02 * n2, kGravity + 0.02 * n3, at);
    }
  }
  // Worn phone during work: about 1 m/s^2 of handling motion on each axis.
  return *telemetry::MotionSample::make(n1, n2, kGravity + n3, at);
}

}  // namespace swsk::device
