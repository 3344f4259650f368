#include "swsk/system/evaluate.hpp"

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "swsk/engine/stress.hpp"
#include "swsk/engine/suitability.hpp"

namespace swsk::system {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

EvalSummary evaluate_csv(std::istream& in, std::ostream& out, const engine::EngineConfig& config) {
  std::string line;
  while (std::getline(in, line) && trim(line).empty()) {
  }
  const auto header = split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"worker", "S", "F", "P"}) {
    if (!col.contains(required)) throw std::invalid_argument(std::string("CSV header lacks column '") + required + "'");
  }
  const bool has_raw = col.contains("hr_dev") && col.contains("gsr_dev") && col.contains("temp_excess");
  if (!col.contains("stress_level") && !has_raw) {
    throw std::invalid_argument("CSV header needs stress_level or hr_dev, gsr_dev and temp_excess");
  }

  EvalSummary sum;
  out << "worker,stress_level,score,risk_class,allowed,max_allowed,error\n";
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++sum.rows;
    const auto cells = split(line);
    auto cell = [&](const std::string& name) -> std::string {
      auto it = col.find(name);
      if (it == col.end() || it->second >= cells.size()) return "";
      return cells[it->second];
    };
    const auto worker = cell("worker");
    auto fail = [&](const std::string& msg) {
      ++sum.errors;
      out << worker << ",,,,,,line " << line_no << ": " << msg << "\n";
    };

    std::optional<engine::StressLevel> level;
    std::string score_text;
    if (!cell("stress_level").empty()) {
      level = engine::parse_stress_level(cell("stress_level"));
      if (!level) {
        fail("stress_level must be L0..L4");
        continue;
      }
    } else {
      const auto hr = to_double(cell("hr_dev"));
      const auto gsr = to_double(cell("gsr_dev"));
      const auto temp = to_double(cell("temp_excess"));
      if (!hr || !gsr || !temp) {
        fail("need stress_level or numeric hr_dev, gsr_dev, temp_excess");
        continue;
      }
      const auto a = engine::score_from_deviations(*hr, *gsr, *temp, config);
      level = a.level;
      std::ostringstream s;
      s << a.score;
      score_text = s.str();
    }
    const auto sv = telemetry::parse_severity(cell("S"));
    const auto fr = telemetry::parse_frequency(cell("F"));
    const auto av = telemetry::parse_avoidance(cell("P"));
    if (!sv || !fr || !av) {
      fail(!sv ? "S must be S1 or S2" : !fr ? "F must be F1 or F2" : "P must be P1 or P2");
      continue;
    }
    const auto cls = engine::classify_risk({*sv, *fr, *av});
    const auto v = engine::assess_suitability(*level, cls);
    ++(v.allowed ? sum.allowed : sum.denied);
    ++sum.by_class[std::string(telemetry::to_string(cls))];
    out << worker << "," << engine::to_string(*level) << "," << score_text << "," << telemetry::to_string(cls) << ","
        << (v.allowed ? "yes" : "no") << ","
        << (v.max_allowed ? std::string(telemetry::to_string(*v.max_allowed)) : std::string("NONE")) << ",\n";
  }
  return sum;
}

}  // namespace swsk::system
