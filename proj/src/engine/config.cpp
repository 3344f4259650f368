#include "swsk/engine/config.hpp"

#include <cmath>

#include "swsk/core/errors.hpp"
#include "swsk/core/json_reader.hpp"

namespace swsk::engine {

namespace {

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw SchemaError(path, what);
}

}  // namespace

void EngineConfig::validate(const std::string& p) const {
  require(calibration_s > 0, p + ".calibration_s", "must be > 0");
  require(window_s > 0, p + ".window_s", "must be > 0");
  require(step_s > 0, p + ".step_s", "must be > 0");

  const auto w = p + ".weights";
  require(weights.hr >= 0, w + ".hr", "must be >= 0");
  require(weights.gsr >= 0, w + ".gsr", "must be >= 0");
  require(weights.temp >= 0, w + ".temp", "must be >= 0");
  require(std::abs(weights.hr + weights.gsr + weights.temp - 1.0) <= 1e-9, w, "weights must sum to 1.0");

  const auto s = p + ".saturation";
  require(saturation.hr_dev > 0, s + ".hr_dev", "must be > 0");
  require(saturation.gsr_dev > 0, s + ".gsr_dev", "must be > 0");
  require(saturation.temp_excess > 0, s + ".temp_excess", "must be > 0");

  for (std::size_t i = 0; i < level_cuts.size(); ++i) {
    const auto at = p + ".level_cuts[" + std::to_string(i) + "]";
    require(level_cuts[i] > 0 && level_cuts[i] < 1, at, "must lie in (0, 1)");
    if (i > 0) require(level_cuts[i] > level_cuts[i - 1], at, "cut-points must be strictly increasing");
  }

  const auto v = p + ".vitals";
  require(vitals.hr_low < vitals.hr_high, v + ".hr_low", "must be below hr_high");
  require(vitals.spo2_crit < vitals.spo2_warn, v + ".spo2_crit", "must be below spo2_warn");
  require(vitals.temp_low < vitals.temp_high, v + ".temp_low", "must be below temp_high");
  require(vitals.sustain_s >= 0, v + ".sustain_s", "must be >= 0");

  const auto e = p + ".env";
  require(env.co2_warn < env.co2_crit, e + ".co2_warn", "must be below co2_crit");
  require(env.amb_low < env.amb_high, e + ".amb_low", "must be below amb_high");

  const auto m = p + ".motion";
  require(motion.impact_mag > 0, m + ".impact_mag", "must be > 0");
  require(motion.inactivity_s >= 0, m + ".inactivity_s", "must be >= 0");
  require(motion.still_tolerance > 0, m + ".still_tolerance", "must be > 0");
}

EngineConfig engine_config_from_json(const nlohmann::json& j, const std::string& path) {
  JsonReader r(j, path);
  r.only({"calibration_s", "window_s", "step_s", "weights", "saturation", "level_cuts", "vitals", "env", "motion"});
  EngineConfig c;
  c.calibration_s = r.number("calibration_s", c.calibration_s);
  c.window_s = r.number("window_s", c.window_s);
  c.step_s = r.number("step_s", c.step_s);
  if (r.has("weights")) {
    auto w = r.object("weights");
    w.only({"hr", "gsr", "temp"});
    c.weights = {w.number("hr", c.weights.hr), w.number("gsr", c.weights.gsr), w.number("temp", c.weights.temp)};
  }
  if (r.has("saturation")) {
    auto s = r.object("saturation");
    s.only({"hr_dev", "gsr_dev", "temp_excess", "temp_reference"});
    c.saturation = {s.number("hr_dev", c.saturation.hr_dev), s.number("gsr_dev", c.saturation.gsr_dev),
                    s.number("temp_excess", c.saturation.temp_excess),
                    s.number("temp_reference", c.saturation.temp_reference)};
  }
  if (r.has("level_cuts")) {
    const auto& arr = r.array("level_cuts");
    if (arr.size() != c.level_cuts.size()) r.fail("level_cuts", "expected exactly 4 cut-points");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) throw SchemaError(r.child_path("level_cuts") + "[" + std::to_string(i) + "]", "expected a number");
      c.level_cuts[i] = arr[i].get<double>();
    }
  }
  if (r.has("vitals")) {
    auto v = r.object("vitals");
    v.only({"hr_low", "hr_high", "spo2_crit", "spo2_warn", "temp_high", "temp_low", "sustain_s"});
    auto& t = c.vitals;
    t = {v.number("hr_low", t.hr_low),       v.number("hr_high", t.hr_high),   v.number("spo2_crit", t.spo2_crit),
         v.number("spo2_warn", t.spo2_warn), v.number("temp_high", t.temp_high), v.number("temp_low", t.temp_low),
         v.number("sustain_s", t.sustain_s)};
  }
  if (r.has("env")) {
    auto e = r.object("env");
    e.only({"co2_warn", "co2_crit", "amb_high", "amb_low", "sound_warn"});
    auto& t = c.env;
    t = {e.number("co2_warn", t.co2_warn), e.number("co2_crit", t.co2_crit), e.number("amb_high", t.amb_high),
         e.number("amb_low", t.amb_low), e.number("sound_warn", t.sound_warn)};
  }
  if (r.has("motion")) {
    auto m = r.object("motion");
    m.only({"enabled", "impact_mag", "inactivity_s", "still_tolerance"});
    auto& t = c.motion;
    t = {m.boolean("enabled", t.enabled), m.number("impact_mag", t.impact_mag),
         m.number("inactivity_s", t.inactivity_s), m.number("still_tolerance", t.still_tolerance)};
  }
  c.validate(path);
  return c;
}

nlohmann::json to_json(const EngineConfig& c) {
  return {
      {"calibration_s", c.calibration_s},
      {"window_s", c.window_s},
      {"step_s", c.step_s},
      {"weights", {{"hr", c.weights.hr}, {"gsr", c.weights.gsr}, {"temp", c.weights.temp}}},
      {"saturation",
       {{"hr_dev", c.saturation.hr_dev},
        {"gsr_dev", c.saturation.gsr_dev},
        {"temp_excess", c.saturation.temp_excess},
        {"temp_reference", c.saturation.temp_reference}}},
      {"level_cuts", c.level_cuts},
      {"vitals",
       {{"hr_low", c.vitals.hr_low},
        {"hr_high", c.vitals.hr_high},
        {"spo2_crit", c.vitals.spo2_crit},
        {"spo2_warn", c.vitals.spo2_warn},
        {"temp_high", c.vitals.temp_high},
        {"temp_low", c.vitals.temp_low},
        {"sustain_s", c.vitals.sustain_s}}},
      {"env",
       {{"co2_warn", c.env.co2_warn},
        {"co2_crit", c.env.co2_crit},
        {"amb_high", c.env.amb_high},
        {"amb_low", c.env.amb_low},
        {"sound_warn", c.env.sound_warn}}},
      {"motion",
       {{"enabled", c.motion.enabled},
        {"impact_mag", c.motion.impact_mag},
        {"inactivity_s", c.motion.inactivity_s},
        {"still_tolerance", c.motion.still_tolerance}}},
  };
}

}  // namespace swsk::engine
