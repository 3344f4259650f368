#include "swsk/engine/stress.hpp"

#include <algorithm>

#include "swsk/core/json_reader.hpp"

namespace swsk::engine {

std::string_view to_string(StressLevel l) {
  static constexpr std::string_view names[] = {"L0", "L1", "L2", "L3", "L4"};
  return names[static_cast<int>(l)];
}

std::optional<StressLevel> parse_stress_level(std::string_view s) {
  for (int i = 0; i < kStressLevelCount; ++i) {
    if (to_string(static_cast<StressLevel>(i)) == s) return static_cast<StressLevel>(i);
  }
  return std::nullopt;
}

StressLevel level_for(double score, const EngineConfig& config) {
  int n = 0;
  for (double cut : config.level_cuts) n += cut < score ? 1 : 0;
  return static_cast<StressLevel>(n);
}

StressAssessment score_from_deviations(double hr_dev, double gsr_dev, double temp_excess, const EngineConfig& c) {
  auto norm = [](double dev, double sat) { return std::clamp(dev / sat, 0.0, 1.0); };
  StressAssessment a;
  a.calibrating = false;
  a.components.hr = norm(hr_dev, c.saturation.hr_dev);
  a.components.gsr = norm(gsr_dev, c.saturation.gsr_dev);
  a.components.temp = norm(temp_excess, c.saturation.temp_excess);
  a.score = c.weights.hr * a.components.hr + c.weights.gsr * a.components.gsr + c.weights.temp * a.components.temp;
  // Weights sum to 1 only within rounding.
  a.score = std::clamp(a.score, 0.0, 1.0);
  a.level = level_for(a.score, c);
  return a;
}

StressAssessment compute_stress(const WindowStats& w, const std::optional<Baseline>& baseline, const EngineConfig& c) {
  if (!baseline) return StressAssessment{};

  auto relative = [](const std::optional<double>& mean, const std::optional<double>& base) {
    if (!mean || !base || *base <= 0) return 0.0;
    return std::max(0.0, (*mean - *base) / *base);
  };
  const double hr_dev = relative(w.hr, baseline->hr);
  const double gsr_dev = relative(w.gsr_us, baseline->gsr_us);
  const double temp_excess = w.body_temp_c ? std::max(0.0, *w.body_temp_c - c.saturation.temp_reference) : 0.0;

  auto a = score_from_deviations(hr_dev, gsr_dev, temp_excess, c);
  if (!w.hr) a.gaps.emplace_back("hr");
  if (!w.gsr_us) a.gaps.emplace_back("gsr");
  if (!w.body_temp_c) a.gaps.emplace_back("body_temp");
  return a;
}

nlohmann::json to_json(const StressAssessment& a) {
  return {{"score", a.score},
          {"level", to_string(a.level)},
          {"components", {{"hr_dev_norm", a.components.hr}, {"gsr_dev_norm", a.components.gsr}, {"temp_dev_norm", a.components.temp}}},
          {"calibrating", a.calibrating},
          {"gaps", a.gaps}};
}

StressAssessment stress_from_json(const nlohmann::json& j) {
  JsonReader r(j, "assessment");
  StressAssessment a;
  a.score = r.number("score");
  auto level = parse_stress_level(r.string("level"));
  if (!level) r.fail("level", "unknown stress level");
  a.level = *level;
  auto comp = r.object("components");
  a.components = {comp.number("hr_dev_norm"), comp.number("gsr_dev_norm"), comp.number("temp_dev_norm")};
  a.calibrating = r.boolean("calibrating", false);
  if (r.has("gaps")) {
    for (const auto& g : r.array("gaps")) a.gaps.push_back(g.get<std::string>());
  }
  return a;
}

}  // namespace swsk::engine
