#include "swsk/device/scenario.hpp"

#include <cmath>

#include "swsk/core/errors.hpp"
#include "swsk/core/json_reader.hpp"

namespace swsk::device {

std::string_view to_string(SensorField f) {
  switch (f) {
    case SensorField::Hr: return "hr";
    case SensorField::Spo2: return "spo2";
    case SensorField::BodyTemp: return "body_temp";
    case SensorField::Gsr: return "gsr";
  }
  return "?";
}

namespace {

std::optional<SensorField> parse_field(std::string_view s) {
  if (s == "hr") return SensorField::Hr;
  if (s == "spo2") return SensorField::Spo2;
  if (s == "body_temp") return SensorField::BodyTemp;
  if (s == "gsr") return SensorField::Gsr;
  return std::nullopt;
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw SchemaError(path, what);
}

void check_time(double t, double duration, const std::string& path) {
  require(std::isfinite(t) && t >= 0.0 && t <= duration, path, "time must lie within [0, duration_s]");
}

void check_window(double start, double end, double duration, const std::string& path) {
  check_time(start, duration, path + ".start_s");
  check_time(end, duration, path + ".end_s");
  require(end >= start, path, "end_s must not precede start_s");
}

}  // namespace

void WorkerProfile::validate(const std::string& path) const {
  require(hr_base >= 40.0 && hr_base <= 120.0, path + ".hr_base", "must be within [40, 120]");
  require(spo2_base >= 90.0 && spo2_base <= 100.0, path + ".spo2_base", "must be within [90, 100]");
  require(gsr_base > 0.0 && std::isfinite(gsr_base), path + ".gsr_base", "must be positive");
  require(body_temp_base >= 30.0 && body_temp_base <= 43.0, path + ".body_temp_base", "must be within [30, 43]");
}

void ScenarioScript::validate(const std::string& path) const {
  require(std::isfinite(duration_s) && duration_s > 0.0, path + ".duration_s", "must be positive");
  require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0 && sample_rate_hz <= 1000.0,
          path + ".sample_rate_hz", "must be within (0, 1000]");
  require(noise.sigma_hr >= 0 && noise.sigma_gsr >= 0 && noise.sigma_temp >= 0, path + ".noise",
          "sigmas must be non-negative");
  require(battery_start >= 0 && battery_start <= 100, path + ".battery_start", "must be within [0, 100]");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::string sp = path + ".segments[" + std::to_string(i) + "]";
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, StressEpisode>) {
            check_window(s.start_s, s.end_s, duration_s, sp);
            require(s.intensity >= 0.0 && s.intensity <= 1.0, sp + ".intensity", "must be within [0, 1]");
          } else if constexpr (std::is_same_v<T, Co2Ramp>) {
            check_window(s.start_s, s.end_s, duration_s, sp);
            require(s.target_ppm >= 0 && s.target_ppm <= 65535, sp + ".target_ppm", "must be within [0, 65535]");
          } else if constexpr (std::is_same_v<T, TempShift>) {
            check_time(s.start_s, duration_s, sp + ".start_s");
          } else if constexpr (std::is_same_v<T, Spo2Drop>) {
            check_window(s.start_s, s.end_s, duration_s, sp);
            require(s.target_pct >= 70 && s.target_pct <= 100, sp + ".target_pct", "must be within [70, 100]");
          } else if constexpr (std::is_same_v<T, ButtonPress>) {
            check_time(s.at_s, duration_s, sp + ".at_s");
          } else if constexpr (std::is_same_v<T, SensorFault>) {
            check_time(s.at_s, duration_s, sp + ".at_s");
            if (s.until_s) {
              check_time(*s.until_s, duration_s, sp + ".until_s");
              require(*s.until_s >= s.at_s, sp + ".until_s", "must not precede at_s");
            }
          } else if constexpr (std::is_same_v<T, Fall>) {
            check_time(s.at_s, duration_s, sp + ".at_s");
            require(s.peak_mag > 0 && s.still_s >= 0, sp, "peak_mag must be positive, still_s non-negative");
          } else if constexpr (std::is_same_v<T, LinkFaultWindow>) {
            check_window(s.start_s, s.end_s, duration_s, sp);
            require(!s.link.empty(), sp + ".link", "must name a link");
            if (s.drop_prob) {
              require(*s.drop_prob >= 0 && *s.drop_prob <= 1, sp + ".drop_prob", "must be within [0, 1]");
            }
          }
        },
        segments[i]);
  }
}

WorkerProfile profile_from_json(const nlohmann::json& j, const std::string& path) {
  JsonReader r(j, path);
  r.only({"hr_base", "gsr_base", "body_temp_base", "spo2_base"});
  WorkerProfile p;
  p.hr_base = r.number("hr_base", p.hr_base);
  p.gsr_base = r.number("gsr_base", p.gsr_base);
  p.body_temp_base = r.number("body_temp_base", p.body_temp_base);
  p.spo2_base = r.number("spo2_base", p.spo2_base);
  p.validate(path);
  return p;
}

namespace {

Segment segment_from_json(const JsonReader& r) {
  const auto kind = r.string("kind");
  if (kind == "stress_episode") {
    r.only({"kind", "start_s", "end_s", "intensity"});
    return StressEpisode{r.number("start_s"), r.number("end_s"), r.number("intensity")};
  }
  if (kind == "co2_ramp") {
    r.only({"kind", "start_s", "end_s", "target_ppm"});
    return Co2Ramp{r.number("start_s"), r.number("end_s"), r.number("target_ppm")};
  }
  if (kind == "temp_shift") {
    r.only({"kind", "start_s", "delta_c"});
    return TempShift{r.number("start_s"), r.number("delta_c")};
  }
  if (kind == "spo2_drop") {
    r.only({"kind", "start_s", "end_s", "target_pct"});
    return Spo2Drop{r.number("start_s"), r.number("end_s"), r.number("target_pct")};
  }
  if (kind == "button_press") {
    r.only({"kind", "at_s"});
    return ButtonPress{r.number("at_s")};
  }
  if (kind == "sensor_fault") {
    r.only({"kind", "at_s", "field", "until_s"});
    auto field = parse_field(r.string("field"));
    if (!field) r.fail("field", "expected one of hr, spo2, body_temp, gsr");
    return SensorFault{r.number("at_s"), *field, r.optional_number("until_s")};
  }
  if (kind == "fall") {
    r.only({"kind", "at_s", "peak_mag", "still_s"});
    return Fall{r.number("at_s"), r.number("peak_mag", 35.0), r.number("still_s", 90.0)};
  }
  if (kind == "link_fault") {
    r.only({"kind", "link", "start_s", "end_s", "drop_prob"});
    return LinkFaultWindow{r.string("link"), r.number("start_s"), r.number("end_s"), r.optional_number("drop_prob")};
  }
  r.fail("kind", "unknown segment kind '" + kind + "'");
}

}  // namespace

ScenarioScript scenario_from_json(const nlohmann::json& j, const std::string& path, const ScenarioScript& defaults) {
  JsonReader r(j, path);
  ScenarioScript s = defaults;
  s.seed = r.unsigned_integer("seed", defaults.seed);
  s.duration_s = r.number("duration_s", defaults.duration_s);
  s.sample_rate_hz = r.number("sample_rate_hz", defaults.sample_rate_hz);
  s.battery_start = r.number("battery_start", defaults.battery_start);
  s.battery_drain_per_hour = r.number("battery_drain_per_hour", defaults.battery_drain_per_hour);
  if (r.has("ambient")) {
    auto a = r.object("ambient");
    a.only({"amb_temp_c", "humidity", "co2_ppm", "light_lux", "sound_db", "voc_ppb"});
    s.ambient.amb_temp_c = a.number("amb_temp_c", s.ambient.amb_temp_c);
    s.ambient.humidity = a.number("humidity", s.ambient.humidity);
    s.ambient.co2_ppm = a.number("co2_ppm", s.ambient.co2_ppm);
    s.ambient.light_lux = a.number("light_lux", s.ambient.light_lux);
    s.ambient.sound_db = a.number("sound_db", s.ambient.sound_db);
    s.ambient.voc_ppb = a.number("voc_ppb", s.ambient.voc_ppb);
  }
  if (r.has("noise")) {
    auto n = r.object("noise");
    n.only({"sigma_hr", "sigma_gsr", "sigma_temp"});
    s.noise.sigma_hr = n.number("sigma_hr", s.noise.sigma_hr);
    s.noise.sigma_gsr = n.number("sigma_gsr", s.noise.sigma_gsr);
    s.noise.sigma_temp = n.number("sigma_temp", s.noise.sigma_temp);
  }
  if (r.has("segments")) {
    const auto& arr = r.array("segments");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      s.segments.push_back(segment_from_json(JsonReader(arr[i], r.child_path("segments") + "[" + std::to_string(i) + "]")));
    }
  }
  s.validate(path);
  return s;
}

nlohmann::json to_json(const Segment& seg) {
  return std::visit(
      [](const auto& s) -> nlohmann::json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, StressEpisode>) {
          return {{"kind", "stress_episode"}, {"start_s", s.start_s}, {"end_s", s.end_s}, {"intensity", s.intensity}};
        } else if constexpr (std::is_same_v<T, Co2Ramp>) {
          return {{"kind", "co2_ramp"}, {"start_s", s.start_s}, {"end_s", s.end_s}, {"target_ppm", s.target_ppm}};
        } else if constexpr (std::is_same_v<T, TempShift>) {
          return {{"kind", "temp_shift"}, {"start_s", s.start_s}, {"delta_c", s.delta_c}};
        } else if constexpr (std::is_same_v<T, Spo2Drop>) {
          return {{"kind", "spo2_drop"}, {"start_s", s.start_s}, {"end_s", s.end_s}, {"target_pct", s.target_pct}};
        } else if constexpr (std::is_same_v<T, ButtonPress>) {
          return {{"kind", "button_press"}, {"at_s", s.at_s}};
        } else if constexpr (std::is_same_v<T, SensorFault>) {
          nlohmann::json j{{"kind", "sensor_fault"}, {"at_s", s.at_s}, {"field", to_string(s.field)}};
          if (s.until_s) j["until_s"] = *s.until_s;
          return j;
        } else if constexpr (std::is_same_v<T, Fall>) {
          return {{"kind", "fall"}, {"at_s", s.at_s}, {"peak_mag", s.peak_mag}, {"still_s", s.still_s}};
        } else {
          nlohmann::json j{{"kind", "link_fault"}, {"link", s.link}, {"start_s", s.start_s}, {"end_s", s.end_s}};
          if (s.drop_prob) j["drop_prob"] = *s.drop_prob;
          return j;
        }
      },
      seg);
}

}  // namespace swsk::device
