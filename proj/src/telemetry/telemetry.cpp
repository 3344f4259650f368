#include "swsk/telemetry/telemetry.hpp"

#include <cmath>
#include <vector>

#include "swsk/core/json_reader.hpp"

namespace swsk::telemetry {

std::optional<MotionSample> MotionSample::make(double ax, double ay, double az, VirtualMs sampled_at) {
  if (!std::isfinite(ax) || !std::isfinite(ay) || !std::isfinite(az)) return std::nullopt;
  const double mag = std::sqrt(ax * ax + ay * ay + az * az);
  if (!std::isfinite(mag)) return std::nullopt;
  return MotionSample{ax, ay, az, mag, sampled_at};
}

PhysicalFrame to_physical(const DeviceFrame& f) {
  PhysicalFrame p;
  p.seq = f.seq;
  p.t_ms = f.t_ms;
  p.flags = f.flags;
  if (f.hr_valid()) p.vitals.hr = f.hr;
  if (f.spo2_valid()) p.vitals.spo2 = f.spo2;
  if (f.body_temp_valid()) p.vitals.body_temp_c = f.body_temp / 100.0;
  // The sensor reports conductance directly (conductance = 1 / skin resistance).
  if (f.gsr_valid()) p.vitals.gsr_us = f.gsr / 100.0;
  p.env.amb_temp_c = f.amb_temp / 100.0;
  p.env.humidity = f.humidity;
  p.env.light = f.light;
  p.env.co2 = f.co2;
  p.env.voc = f.voc;
  p.env.sound = f.sound;
  p.battery = f.battery;
  return p;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> read_opt(const JsonReader& r, std::string_view key) {
  if (!r.raw().contains(key)) r.fail(key, "missing member");
  return r.optional_number(key);
}

}  // namespace

nlohmann::json to_json(const WorkerTelemetry& t) {
  nlohmann::json j;
  j["worker_id"] = t.worker_id;
  j["site_id"] = t.site_id;
  j["recv_ts"] = t.recv_ts;
  j["gateway_seq"] = t.gateway_seq;
  j["vitals"] = {{"hr", opt(t.frame.vitals.hr)},
                 {"spo2", opt(t.frame.vitals.spo2)},
                 {"body_temp_c", opt(t.frame.vitals.body_temp_c)},
                 {"gsr_us", opt(t.frame.vitals.gsr_us)}};
  j["env"] = {{"amb_temp_c", t.frame.env.amb_temp_c}, {"humidity", t.frame.env.humidity},
              {"light", t.frame.env.light},           {"co2", t.frame.env.co2},
              {"voc", t.frame.env.voc},               {"sound", t.frame.env.sound}};
  if (t.motion) {
    j["motion"] = {{"ax", t.motion->ax},
                   {"ay", t.motion->ay},
                   {"az", t.motion->az},
                   {"mag", t.motion->magnitude},
                   {"sampled_at", t.motion->sampled_at}};
  } else {
    j["motion"] = nullptr;
  }
  j["flags"] = t.frame.flags.names();
  j["battery"] = t.frame.battery;
  j["device"] = {{"seq", t.frame.seq}, {"t_ms", t.frame.t_ms}};
  return j;
}

WorkerTelemetry telemetry_from_json(const nlohmann::json& j) {
  JsonReader r(j, "");
  WorkerTelemetry t;
  t.worker_id = r.string("worker_id");
  t.site_id = r.string("site_id");
  t.recv_ts = r.integer("recv_ts");
  t.gateway_seq = r.unsigned_integer("gateway_seq", 0);

  auto v = r.object("vitals");
  t.frame.vitals.hr = read_opt(v, "hr");
  t.frame.vitals.spo2 = read_opt(v, "spo2");
  t.frame.vitals.body_temp_c = read_opt(v, "body_temp_c");
  t.frame.vitals.gsr_us = read_opt(v, "gsr_us");

  auto e = r.object("env");
  t.frame.env.amb_temp_c = e.number("amb_temp_c");
  t.frame.env.humidity = e.number("humidity");
  t.frame.env.light = e.number("light");
  t.frame.env.co2 = e.number("co2");
  t.frame.env.voc = e.number("voc");
  t.frame.env.sound = e.number("sound");

  if (r.has("motion")) {
    auto m = r.object("motion");
    auto sample = MotionSample::make(m.number("ax"), m.number("ay"), m.number("az"), m.integer("sampled_at", 0));
    if (!sample) m.fail("non-finite motion component");
    t.motion = sample;
  }

  const auto& flags = r.array("flags");
  std::vector<std::string> names;
  for (const auto& f : flags) {
    if (!f.is_string()) r.fail("flags", "expected flag names");
    names.push_back(f.get<std::string>());
  }
  auto parsed = FrameFlags::from_names(names);
  if (!parsed) r.fail("flags", "unknown flag name");
  t.frame.flags = *parsed;
  t.frame.battery = r.number("battery");

  if (r.has("device")) {
    auto d = r.object("device");
    t.frame.seq = static_cast<std::uint16_t>(d.integer("seq", 0));
    t.frame.t_ms = static_cast<std::uint32_t>(d.integer("t_ms", 0));
  }
  return t;
}

}  // namespace swsk::telemetry
