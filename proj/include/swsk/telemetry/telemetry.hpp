#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "swsk/core/time.hpp"
#include "swsk/telemetry/frame.hpp"

namespace swsk::telemetry {

// Phone IMU reading attached by the gateway.
struct MotionSample {
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;
  double magnitude = 0.0;  // m/s^2
  VirtualMs sampled_at = 0;

  /// nullopt when any component is non-finite.
  static std::optional<MotionSample> make(double ax, double ay, double az, VirtualMs sampled_at);

  friend bool operator==(const MotionSample&, const MotionSample&) = default;
};

struct Vitals {
  std::optional<double> hr;           // bpm
  std::optional<double> spo2;         // percent
  std::optional<double> body_temp_c;
  std::optional<double> gsr_us;       // skin conductance

  friend bool operator==(const Vitals&, const Vitals&) = default;
};

struct Environment {
  double amb_temp_c = 0.0;
  double humidity = 0.0;
  double light = 0.0;
  double co2 = 0.0;
  double voc = 0.0;
  double sound = 0.0;

  friend bool operator==(const Environment&, const Environment&) = default;
};

// A DeviceFrame in physical units: temperatures in degC, conductance in uS,
// invalid sentinels mapped to nullopt.
struct PhysicalFrame {
  std::uint16_t seq = 0;
  std::uint32_t t_ms = 0;
  FrameFlags flags;
  Vitals vitals;
  Environment env;
  double battery = 0.0;

  friend bool operator==(const PhysicalFrame&, const PhysicalFrame&) = default;
};

PhysicalFrame to_physical(const DeviceFrame& f);

struct WorkerTelemetry {
  std::string worker_id;
  std::string site_id;
  VirtualMs recv_ts = 0;
  std::uint64_t gateway_seq = 0;
  PhysicalFrame frame;
  std::optional<MotionSample> motion;

  friend bool operator==(const WorkerTelemetry&, const WorkerTelemetry&) = default;
};

// Telemetry topic payload:
// {worker_id, site_id, recv_ts, gateway_seq,
//  vitals {hr, spo2, body_temp_c, gsr_us}          (null when invalid)
//  env {amb_temp_c, humidity, light, co2, voc, sound},
//  motion {ax, ay, az, mag, sampled_at} | null,
//  flags [names], battery, device {seq, t_ms}}
nlohmann::json to_json(const WorkerTelemetry& t);

/// Throws SchemaError naming the offending member.
WorkerTelemetry telemetry_from_json(const nlohmann::json& j);

}  // namespace swsk::telemetry
