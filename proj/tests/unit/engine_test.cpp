#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "swsk/core/errors.hpp"
#include "swsk/core/random.hpp"
#include "swsk/engine/alerts.hpp"
#include "swsk/engine/planner.hpp"
#include "swsk/engine/session.hpp"
#include "swsk/engine/suitability.hpp"

namespace swsk::engine {
namespace {

using telemetry::Avoidance;
using telemetry::Frequency;
using telemetry::Severity;

// Risk graph rows as printed in the standard, written out independently.
struct RiskRow {
  const char* params;
  char level;
};
constexpr RiskRow kRiskGraph[] = {
    {"S1F1P1", 'a'}, {"S1F1P2", 'b'}, {"S1F2P1", 'b'}, {"S1F2P2", 'c'},
    {"S2F1P1", 'c'}, {"S2F1P2", 'd'}, {"S2F2P1", 'd'}, {"S2F2P2", 'e'},
};

RiskParams params_of(const std::string& s) {
  return RiskParams{s[1] == '2' ? Severity::S2 : Severity::S1, s[3] == '2' ? Frequency::F2 : Frequency::F1,
                    s[5] == '2' ? Avoidance::P2 : Avoidance::P1};
}

TEST(RiskGraph, MatchesTranscribedTable) {
  for (const auto& row : kRiskGraph) {
    EXPECT_EQ(to_string(classify_risk(params_of(row.params))), std::string(1, row.level)) << row.params;
  }
  EXPECT_EQ(classify_risk({Severity::S1, Frequency::F1, Avoidance::P1}), RiskClass::a);
  EXPECT_EQ(classify_risk({Severity::S2, Frequency::F2, Avoidance::P2}), RiskClass::e);
  EXPECT_EQ(classify_risk({Severity::S2, Frequency::F1, Avoidance::P2}), RiskClass::d);
}

TEST(RiskGraph, FlippingAnyParameterUpNeverLowersRisk) {
  for (const auto& row : kRiskGraph) {
    const std::string p = row.params;
    for (int pos : {1, 3, 5}) {
      if (p[pos] != '1') continue;
      std::string up = p;
      up[pos] = '2';
      EXPECT_GE(classify_risk(params_of(up)), classify_risk(params_of(p))) << p << " -> " << up;
    }
  }
}

// Independent evaluation of the weighted score.
double oracle_score(double hr_dev, double gsr_dev, double temp_excess) {
  auto c = [](double d, double sat) { return std::min(1.0, std::max(0.0, d) / sat); };
  return 0.50 * c(hr_dev, 0.5) + 0.35 * c(gsr_dev, 1.0) + 0.15 * c(temp_excess, 1.3);
}

TEST(Stress, WorkedExample) {
  const EngineConfig cfg;
  const auto a = score_from_deviations(0.25, 0.5, 0.0, cfg);
  EXPECT_NEAR(a.components.hr, 0.5, 1e-12);
  EXPECT_NEAR(a.components.gsr, 0.5, 1e-12);
  EXPECT_NEAR(a.components.temp, 0.0, 1e-12);
  EXPECT_NEAR(a.score, 0.425, 1e-9);
  EXPECT_EQ(a.level, StressLevel::L2);
}

TEST(Stress, BaselineMeansScoreZero) {
  const EngineConfig cfg;
  const Baseline b{72.0, 5.0, 36.6};
  const auto a = compute_stress(WindowStats{72.0, 5.0, 36.6}, b, cfg);
  EXPECT_FALSE(a.calibrating);
  EXPECT_EQ(a.score, 0.0);
  EXPECT_EQ(a.level, StressLevel::L0);
}

TEST(Stress, SaturatedIsOne) {
  const EngineConfig cfg;
  const auto a = compute_stress(WindowStats{200.0, 50.0, 40.0}, Baseline{70.0, 5.0, 36.6}, cfg);
  EXPECT_NEAR(a.score, 1.0, 1e-9);
  EXPECT_EQ(a.level, StressLevel::L4);
}

TEST(Stress, NoBaselineIsCalibrating) {
  const auto a = compute_stress(WindowStats{200.0, 50.0, 40.0}, std::nullopt, EngineConfig{});
  EXPECT_TRUE(a.calibrating);
  EXPECT_EQ(a.score, 0.0);
  EXPECT_EQ(a.level, StressLevel::L0);
}

TEST(Stress, ComputeMatchesOracleOnRandomInputs) {
  const EngineConfig cfg;
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const Baseline b{rng.uniform(40, 120), rng.uniform(0.5, 20), 36.6};
    const WindowStats w{rng.uniform(30, 220), rng.uniform(0.1, 50), rng.uniform(35, 41)};
    const auto a = compute_stress(w, b, cfg);
    const double expect = oracle_score((*w.hr - *b.hr) / *b.hr, (*w.gsr_us - *b.gsr_us) / *b.gsr_us, *w.body_temp_c - 37.2);
    ASSERT_NEAR(a.score, expect, 1e-9);
    ASSERT_GE(a.score, 0.0);
    ASSERT_LE(a.score, 1.0);
    const double sum = 0.5 * a.components.hr + 0.35 * a.components.gsr + 0.15 * a.components.temp;
    ASSERT_NEAR(a.score, sum, 1e-9);
    int below = 0;
    for (double cut : {0.2, 0.4, 0.6, 0.8}) below += cut < a.score;
    ASSERT_EQ(static_cast<int>(a.level), below);
  }
}

TEST(Stress, LevelBoundariesAreStrict) {
  const EngineConfig cfg;
  EXPECT_EQ(level_for(0.2, cfg), StressLevel::L0);
  EXPECT_EQ(level_for(std::nextafter(0.2, 1.0), cfg), StressLevel::L1);
  EXPECT_EQ(level_for(0.8, cfg), StressLevel::L3);
  EXPECT_EQ(level_for(1.0, cfg), StressLevel::L4);
}

TEST(Stress, MonotoneInHeartRate) {
  const EngineConfig cfg;
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Baseline b{rng.uniform(40, 120), rng.uniform(0.5, 20), 36.6};
    WindowStats w{rng.uniform(30, 220), rng.uniform(0.1, 50), rng.uniform(35, 41)};
    const auto lo = compute_stress(w, b, cfg);
    w.hr = *w.hr + rng.uniform(0, 50);
    const auto hi = compute_stress(w, b, cfg);
    ASSERT_GE(hi.score, lo.score);
    ASSERT_GE(hi.level, lo.level);
  }
}

TEST(Stress, MissingFieldIsAGapWithZeroComponent) {
  const auto a = compute_stress(WindowStats{std::nullopt, 10.0, 36.6}, Baseline{70.0, 5.0, 36.6}, EngineConfig{});
  EXPECT_EQ(a.components.hr, 0.0);
  EXPECT_NEAR(a.components.gsr, 1.0, 1e-12);
  EXPECT_EQ(a.gaps, std::vector<std::string>{"hr"});
}

// Independent 5x5 oracle: rows L0..L4, columns a..e.
constexpr bool kAllowed[5][5] = {
    {true, true, true, true, true},
    {true, true, true, true, false},
    {true, true, true, false, false},
    {true, true, false, false, false},
    {false, false, false, false, false},
};

TEST(Suitability, FullTable) {
  for (int l = 0; l < kStressLevelCount; ++l) {
    for (int r = 0; r < telemetry::kRiskClassCount; ++r) {
      const auto v = assess_suitability(static_cast<StressLevel>(l), static_cast<RiskClass>(r));
      EXPECT_EQ(v.allowed, kAllowed[l][r]) << l << "," << r;
      EXPECT_EQ(v.allowed, v.max_allowed && v.machine_risk <= *v.max_allowed);
      EXPECT_EQ(v.reasons.empty(), v.allowed);
    }
  }
  EXPECT_TRUE(assess_suitability(StressLevel::L0, RiskClass::e).allowed);
  const auto l4 = assess_suitability(StressLevel::L4, RiskClass::a);
  EXPECT_FALSE(l4.allowed);
  EXPECT_FALSE(l4.max_allowed.has_value());
  EXPECT_EQ(to_json(l4)["max_allowed"], "NONE");
  const auto l2 = assess_suitability(StressLevel::L2, RiskClass::d);
  EXPECT_FALSE(l2.allowed);
  EXPECT_EQ(l2.max_allowed, RiskClass::c);
}

TEST(Suitability, Antitone) {
  for (int a = 0; a < 5; ++a) {
    for (int b = a; b < 5; ++b) {
      for (int r = 0; r < 5; ++r) {
        if (assess_suitability(static_cast<StressLevel>(b), static_cast<RiskClass>(r)).allowed) {
          EXPECT_TRUE(assess_suitability(static_cast<StressLevel>(a), static_cast<RiskClass>(r)).allowed);
        }
      }
    }
  }
}

telemetry::WorkerTelemetry sample(std::uint32_t t_ms) {
  telemetry::WorkerTelemetry t;
  t.worker_id = "w1";
  t.site_id = "plant";
  t.recv_ts = t_ms + 25;
  t.frame.seq = static_cast<std::uint16_t>(t_ms / 1000);
  t.frame.t_ms = t_ms;
  t.frame.vitals = {72.0, 98.0, 36.6, 5.0};
  t.frame.env = {22, 45, 300, 400, 100, 50};
  return t;
}

std::vector<Alert> feed(ThresholdMonitor& m, int from_s, int count, auto&& mutate) {
  std::vector<Alert> out;
  for (int k = from_s; k < from_s + count; ++k) {
    auto t = sample(static_cast<std::uint32_t>(k * 1000));
    mutate(t);
    auto a = m.on_sample(t);
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

TEST(Thresholds, Spo2SustainedTenSamples) {
  ThresholdMonitor m(EngineConfig{}, "w1");
  std::vector<std::size_t> onset_at;
  for (int k = 0; k < 15; ++k) {
    auto t = sample(k * 1000);
    t.frame.vitals.spo2 = 88;
    auto a = m.on_sample(t);
    if (!a.empty()) {
      onset_at.push_back(k + 1);
      ASSERT_EQ(a.size(), 1u);
      EXPECT_EQ(a[0].code, AlertCode::VitalSpo2);
      EXPECT_EQ(a[0].severity, AlertSeverity::Critical);
      EXPECT_EQ(a[0].measurement, "spo2");
      EXPECT_EQ(a[0].value, 88.0);
      EXPECT_EQ(a[0].onset_ts, t.recv_ts);
    }
  }
  EXPECT_EQ(onset_at, std::vector<std::size_t>{10});
  EXPECT_TRUE(m.critical_active());
}

TEST(Thresholds, NineSamplesIsNothing) {
  ThresholdMonitor m(EngineConfig{}, "w1");
  EXPECT_TRUE(feed(m, 0, 9, [](auto& t) { t.frame.vitals.spo2 = 88; }).empty());
  EXPECT_TRUE(feed(m, 9, 20, [](auto&) {}).empty());
  EXPECT_FALSE(m.critical_active());
}

TEST(Thresholds, Co2WarnAndCritical) {
  ThresholdMonitor warn(EngineConfig{}, "w1");
  auto a = feed(warn, 0, 30, [](auto& t) { t.frame.env.co2 = 1200; });
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].code, AlertCode::EnvCo2);
  EXPECT_EQ(a[0].severity, AlertSeverity::Warn);

  ThresholdMonitor crit(EngineConfig{}, "w1");
  a = feed(crit, 0, 30, [](auto& t) { t.frame.env.co2 = 6000; });
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].severity, AlertSeverity::Critical);
  EXPECT_EQ(a[0].measurement, "env.co2");
}

TEST(Thresholds, WarnThenEscalation) {
  ThresholdMonitor m(EngineConfig{}, "w1");
  auto a = feed(m, 0, 15, [](auto& t) { t.frame.env.co2 = 2000; });
  a = feed(m, 15, 15, [](auto& t) { t.frame.env.co2 = 7000; });
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].severity, AlertSeverity::Critical);
}

TEST(Thresholds, OtherRules) {
  struct Case {
    AlertCode code;
    AlertSeverity sev;
    void (*mutate)(telemetry::WorkerTelemetry&);
  };
  const Case cases[] = {
      {AlertCode::VitalHr, AlertSeverity::Critical, [](auto& t) { t.frame.vitals.hr = 160; }},
      {AlertCode::VitalHr, AlertSeverity::Critical, [](auto& t) { t.frame.vitals.hr = 35; }},
      {AlertCode::VitalSpo2, AlertSeverity::Warn, [](auto& t) { t.frame.vitals.spo2 = 92; }},
      {AlertCode::VitalTemp, AlertSeverity::Critical, [](auto& t) { t.frame.vitals.body_temp_c = 39.5; }},
      {AlertCode::VitalTemp, AlertSeverity::Critical, [](auto& t) { t.frame.vitals.body_temp_c = 34.5; }},
      {AlertCode::EnvTemp, AlertSeverity::Warn, [](auto& t) { t.frame.env.amb_temp_c = 47; }},
      {AlertCode::EnvTemp, AlertSeverity::Warn, [](auto& t) { t.frame.env.amb_temp_c = -12; }},
      {AlertCode::EnvSound, AlertSeverity::Warn, [](auto& t) { t.frame.env.sound = 90; }},
  };
  for (const auto& c : cases) {
    ThresholdMonitor m(EngineConfig{}, "w1");
    const auto a = feed(m, 0, 12, c.mutate);
    ASSERT_EQ(a.size(), 1u) << to_string(c.code);
    EXPECT_EQ(a[0].code, c.code);
    EXPECT_EQ(a[0].severity, c.sev);
  }
  ThresholdMonitor m(EngineConfig{}, "w1");
  EXPECT_TRUE(feed(m, 0, 30, [](auto& t) { t.frame.vitals.hr = 150; t.frame.vitals.spo2 = 94; }).empty());
}

TEST(Thresholds, InvalidReadingsDoNotBreakTheHold) {
  ThresholdMonitor m(EngineConfig{}, "w1");
  auto a = feed(m, 0, 5, [](auto& t) { t.frame.vitals.spo2 = 85; });
  a = feed(m, 5, 2, [](auto& t) { t.frame.vitals.spo2.reset(); });
  a = feed(m, 7, 3, [](auto& t) { t.frame.vitals.spo2 = 85; });
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].onset_ts, sample(9000).recv_ts);
}

TEST(Thresholds, ButtonIsImmediateAndDebounced) {
  ThresholdMonitor m(EngineConfig{}, "w1");
  auto t = sample(3000);
  t.frame.flags.set(telemetry::FrameFlag::ButtonEstop);
  auto a = m.on_sample(t);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].code, AlertCode::DeviceButton);
  EXPECT_EQ(a[0].severity, AlertSeverity::Critical);
  EXPECT_EQ(a[0].onset_ts, t.recv_ts);
  t.frame.t_ms = 4000;
  EXPECT_TRUE(m.on_sample(t).empty());
  EXPECT_TRUE(m.on_sample(sample(5000)).empty());
  t.frame.t_ms = 6000;
  EXPECT_EQ(m.on_sample(t).size(), 1u);
}

TEST(Thresholds, DebounceOneOnsetPerEpisode) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    ThresholdMonitor m(EngineConfig{}, "w1");
    int onsets = 0;
    int t = 0;
    const int episodes = 1 + static_cast<int>(rng.next_u64() % 4);
    for (int e = 0; e < episodes; ++e) {
      const int held = 10 + static_cast<int>(rng.next_u64() % 100);
      onsets += static_cast<int>(feed(m, t, held, [](auto& s) { s.frame.env.co2 = 1500; }).size());
      t += held;
      const int gap = 1 + static_cast<int>(rng.next_u64() % 5);
      onsets += static_cast<int>(feed(m, t, gap, [](auto&) {}).size());
      t += gap;
    }
    ASSERT_EQ(onsets, episodes);
  }
}

TEST(Thresholds, ImpactThenStillness) {
  ThresholdMonitor m(EngineConfig{}, "w1");
  std::vector<Alert> all;
  for (int k = 0; k < 200; ++k) {
    auto t = sample(k * 1000);
    double mag = k % 2 ? 11.5 : 8.0;  // normal handling motion
    if (k == 50) mag = 35.0;
    if (k > 50 && k < 140) mag = 9.85;
    t.motion = telemetry::MotionSample::make(0, 0, mag, k * 1000);
    for (auto a : m.on_sample(t)) {
      a.onset_ts = k;
      all.push_back(a);
    }
  }
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].code, AlertCode::MotionImpact);
  EXPECT_EQ(all[0].onset_ts, 110);
  EXPECT_EQ(all[0].value, 35.0);
}

TEST(Thresholds, ImpactFollowedByMovementIsNothing) {
  ThresholdMonitor m(EngineConfig{}, "w1");
  for (int k = 0; k < 200; ++k) {
    auto t = sample(k * 1000);
    const double mag = k == 50 ? 35.0 : (k == 80 ? 13.0 : 9.81);
    t.motion = telemetry::MotionSample::make(0, 0, mag, k * 1000);
    ASSERT_TRUE(m.on_sample(t).empty()) << k;
  }
}

TEST(Thresholds, MotionRuleCanBeDisabled) {
  EngineConfig cfg;
  cfg.motion.enabled = false;
  ThresholdMonitor m(cfg, "w1");
  for (int k = 0; k < 200; ++k) {
    auto t = sample(k * 1000);
    t.motion = telemetry::MotionSample::make(0, 0, k == 5 ? 40.0 : 9.81, k * 1000);
    ASSERT_TRUE(m.on_sample(t).empty());
  }
}

TEST(Thresholds, StressL4AndSensorGap) {
  ThresholdMonitor m(EngineConfig{}, "w1");
  StressAssessment a;
  a.calibrating = false;
  a.level = StressLevel::L4;
  a.score = 0.9;
  a.gaps = {"gsr"};
  auto out = m.on_assessment(a, 100);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].code, AlertCode::StressL4);
  EXPECT_EQ(out[0].severity, AlertSeverity::Critical);
  EXPECT_EQ(out[1].code, AlertCode::SensorGap);
  EXPECT_EQ(out[1].severity, AlertSeverity::Warn);
  EXPECT_TRUE(m.on_assessment(a, 200).empty());
  EXPECT_TRUE(m.critical_active());
  a.level = StressLevel::L3;
  a.gaps.clear();
  EXPECT_TRUE(m.on_assessment(a, 300).empty());
  EXPECT_FALSE(m.critical_active());
}

Alert alert(AlertCode code, AlertSeverity sev) { return Alert{code, sev, "w1", 1000, "x", 1.0, "detail"}; }

TEST(Planner, CriticalAssignedStopsMachine) {
  EpisodeState ep;
  const auto p = plan_actions({alert(AlertCode::VitalSpo2, AlertSeverity::Critical)}, nullptr, "m1", true, ep, "w1");
  ASSERT_EQ(p.commands.size(), 1u);
  EXPECT_EQ(p.commands[0].machine_id, "m1");
  EXPECT_EQ(p.commands[0].source, CommandSource::Auto);
  EXPECT_TRUE(p.notifications.empty());
}

TEST(Planner, ButtonSourceIsDeviceButton) {
  EpisodeState ep;
  const auto p = plan_actions({alert(AlertCode::DeviceButton, AlertSeverity::Critical)}, nullptr, "m1", true, ep, "w1");
  ASSERT_EQ(p.commands.size(), 1u);
  EXPECT_EQ(p.commands[0].source, CommandSource::DeviceButton);
}

TEST(Planner, WarnOnlyNotifies) {
  EpisodeState ep;
  const auto p = plan_actions({alert(AlertCode::EnvCo2, AlertSeverity::Warn)}, nullptr, "m1", false, ep, "w1");
  EXPECT_TRUE(p.commands.empty());
  EXPECT_EQ(p.notifications.size(), 1u);
}

TEST(Planner, UnassignedCriticalNotifies) {
  EpisodeState ep;
  const auto p = plan_actions({alert(AlertCode::VitalSpo2, AlertSeverity::Critical)}, nullptr, std::nullopt, true, ep, "w1");
  EXPECT_TRUE(p.commands.empty());
  EXPECT_EQ(p.notifications.size(), 1u);
}

TEST(Planner, OneEstopPerEpisode) {
  RuleBasedPolicy policy;
  const std::vector<Alert> spo2{alert(AlertCode::VitalSpo2, AlertSeverity::Critical)};
  const std::vector<Alert> hr{alert(AlertCode::VitalHr, AlertSeverity::Critical)};
  const std::vector<Alert> none;
  EXPECT_EQ(policy.decide({"w1", 0, spo2, nullptr, "m1", true}).commands.size(), 1u);
  EXPECT_EQ(policy.decide({"w1", 0, hr, nullptr, "m1", true}).commands.size(), 0u);
  EXPECT_EQ(policy.decide({"w1", 0, none, nullptr, "m1", false}).commands.size(), 0u);
  EXPECT_EQ(policy.decide({"w1", 0, hr, nullptr, "m1", true}).commands.size(), 1u);
  // Other workers have their own episodes.
  EXPECT_EQ(policy.decide({"w2", 0, hr, nullptr, "m2", true}).commands.size(), 1u);
}

TEST(Planner, L4AssessmentStops) {
  EpisodeState ep;
  StressAssessment a;
  a.calibrating = false;
  a.level = StressLevel::L4;
  const std::vector<Alert> none;
  auto p = plan_actions(none, &a, "m1", true, ep, "w1");
  ASSERT_EQ(p.commands.size(), 1u);
  p = plan_actions(none, &a, "m1", true, ep, "w1");
  EXPECT_TRUE(p.commands.empty());
}

TEST(EngineConfigJson, DefaultsAndOverrides) {
  const auto c = engine_config_from_json(nlohmann::json::parse(R"({"vitals": {"sustain_s": 5}, "weights": {"hr": 0.6, "gsr": 0.25}})"));
  EXPECT_EQ(c.vitals.sustain_s, 5);
  EXPECT_EQ(c.vitals.spo2_crit, 90);
  EXPECT_DOUBLE_EQ(c.weights.temp, 0.15);
  const auto round = engine_config_from_json(to_json(EngineConfig{}));
  EXPECT_EQ(to_json(round), to_json(EngineConfig{}));
}

TEST(EngineConfigJson, InvalidFailsWithPath) {
  auto path_of = [](const char* text) {
    try {
      engine_config_from_json(nlohmann::json::parse(text));
    } catch (const SchemaError& e) {
      return e.path();
    }
    return std::string("accepted");
  };
  EXPECT_EQ(path_of(R"({"weights": {"hr": 0.9}})"), "engine.weights");
  EXPECT_EQ(path_of(R"({"level_cuts": [0.2, 0.4, 0.3, 0.8]})"), "engine.level_cuts[2]");
  EXPECT_EQ(path_of(R"({"env": {"co2_warn": 6000}})"), "engine.env.co2_warn");
  EXPECT_EQ(path_of(R"({"vitals": {"spo2_warn": 89}})"), "engine.vitals.spo2_crit");
  EXPECT_EQ(path_of(R"({"vitals": {"bogus": 1}})"), "engine.vitals.bogus");
  EXPECT_EQ(path_of(R"({"step_s": "five"})"), "engine.step_s");
}

TEST(Session, CalibratesThenScores) {
  WorkerSession s(EngineConfig{}, "w1", 0);
  std::optional<StressAssessment> last;
  int assessments = 0;
  for (int k = 0; k < 200; ++k) {
    auto t = sample(k * 1000);
    t.recv_ts = k * 1000 + 20;
    t.frame.vitals.hr = k < 150 ? 70.0 : 87.5;  // +25 %
    t.frame.vitals.gsr_us = k < 150 ? 4.0 : 6.0;  // +50 %
    auto u = s.ingest(t);
    if (u.assessment) {
      ++assessments;
      last = u.assessment;
      if (k < 120) {
        EXPECT_TRUE(u.assessment->calibrating) << k;
      }
    }
  }
  EXPECT_EQ(assessments, 39);
  ASSERT_TRUE(s.baseline().has_value());
  EXPECT_DOUBLE_EQ(*s.baseline()->hr, 70.0);
  EXPECT_DOUBLE_EQ(*s.baseline()->gsr_us, 4.0);
  ASSERT_TRUE(last);
  EXPECT_FALSE(last->calibrating);
  EXPECT_NEAR(last->score, 0.425, 1e-9);
  EXPECT_EQ(last->level, StressLevel::L2);
}

TEST(Session, AllInvalidFieldRaisesSensorGap) {
  WorkerSession s(EngineConfig{}, "w1", 0);
  std::vector<Alert> gaps;
  for (int k = 0; k < 200; ++k) {
    auto t = sample(k * 1000);
    if (k >= 150) t.frame.vitals.gsr_us.reset();
    for (auto& a : s.ingest(t).onsets) {
      if (a.code == AlertCode::SensorGap) gaps.push_back(a);
    }
  }
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_EQ(gaps[0].measurement, "gsr");
  EXPECT_GE(gaps[0].onset_ts, 180000);
}

}  // namespace
}  // namespace swsk::engine
