// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Tolerances and runtime limits are pinned below.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "swsk/core/hash.hpp"
#include "swsk/core/random.hpp"
#include "swsk/engine/alerts.hpp"
#include "swsk/engine/session.hpp"
#include "swsk/engine/suitability.hpp"
#include "swsk/machine/controller.hpp"
#include "swsk/server/event_log.hpp"
#include "swsk/system/scenario.hpp"
#include "swsk/system/simulation.hpp"
#include "swsk/telemetry/crc16.hpp"
#include "swsk/telemetry/frame.hpp"

namespace {

namespace fs = std::filesystem;
using namespace swsk;

constexpr double kRiskTableLimitS = 1;
constexpr double kCodecLimitS = 5;
constexpr int kCodecFrames = 10000;
constexpr int kCorruptionCases = 10000;
constexpr std::uint16_t kCrcCheck = 0x29B1;
constexpr double kE2eLimitS = 10;
constexpr VirtualMs kAutoEstopWithinMs = 500;
constexpr VirtualMs kMaxHopMs = 50;
constexpr std::uint64_t kE2eSeed = 42;
constexpr double kButtonLimitS = 5;
constexpr VirtualMs kButtonWithinMs = 200;
constexpr double kLossLimitS = 10;
constexpr double kLossRate = 0.2;
constexpr std::uint64_t kLossSeeds[] = {42, 1, 2, 3, 4, 5, 6, 7};
constexpr double kWatchdogLimitS = 30;
constexpr VirtualMs kPartitionMs = 3000;  // must exceed this
constexpr int kTraceLength = 6;
constexpr double kDecisionLimitS = 10;
constexpr int kPropertyCases = 1000;
constexpr double kReplayLimitS = 10;

fs::path g_scenarios;
fs::path g_scratch;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

int g_failed = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= limit_s) o.require(false, "runtime over limit");
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2f s / %.0f s", secs, limit_s);
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << timing << "]";
  if (!o.detail.empty()) std::cout << "  " << o.detail;
  std::cout << std::endl;
  if (!o.pass) ++g_failed;
}

system::SystemScenario scenario(const std::string& name) {
  return system::load_system_scenario((g_scenarios / (name + ".json")).string());
}

system::SimRun simulate(const system::SystemScenario& sc, const std::string& out = "",
                        std::optional<std::uint64_t> seed = std::nullopt) {
  system::SimOptions o;
  o.seed = seed;
  o.keep_records = false;
  if (!out.empty()) {
    o.out_dir = g_scratch / out;
    fs::remove_all(*o.out_dir);
    fs::create_directories(*o.out_dir);
  }
  return system::run_simulation(sc, system::SystemConfig{}, o);
}

std::string file_sha(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// --- risk graph -------------------------------------------------------------

Outcome risk_table() {
  Outcome o;
  const std::pair<const char*, char> table[] = {{"111", 'a'}, {"112", 'b'}, {"121", 'b'}, {"122", 'c'},
                                                {"211", 'c'}, {"212", 'd'}, {"221", 'd'}, {"222", 'e'}};
  auto params = [](const std::string& s) {
    return engine::RiskParams{s[0] == '2' ? telemetry::Severity::S2 : telemetry::Severity::S1,
                              s[1] == '2' ? telemetry::Frequency::F2 : telemetry::Frequency::F1,
                              s[2] == '2' ? telemetry::Avoidance::P2 : telemetry::Avoidance::P1};
  };
  for (const auto& [p, level] : table) {
    const auto got = std::string(telemetry::to_string(engine::classify_risk(params(p))));
    o.require(got == std::string(1, level), std::string("S") + p[0] + "F" + p[1] + "P" + p[2] + " -> " + got);
    std::string s = p;
    for (int i = 0; i < 3; ++i) {
      if (s[i] != '1') continue;
      std::string up = s;
      up[i] = '2';
      o.require(engine::classify_risk(params(up)) >= engine::classify_risk(params(s)), "monotonicity " + s + "->" + up);
    }
  }
  o.detail = o.pass ? "8/8 rows, 12 flips monotone" : o.detail;
  return o;
}

// --- codec ----------------------------------------------------------------

telemetry::DeviceFrame random_frame(Rng& rng) {
  telemetry::DeviceFrame f;
  auto u = [&](std::uint64_t n) { return rng.next_u64() % n; };
  f.seq = static_cast<std::uint16_t>(u(65536));
  f.t_ms = static_cast<std::uint32_t>(rng.next_u64());
  f.flags = telemetry::FrameFlags(static_cast<std::uint8_t>(u(16)));
  f.hr = static_cast<std::uint8_t>(u(2) ? 0 : 30 + u(191));
  f.spo2 = static_cast<std::uint8_t>(u(2) ? 0 : 70 + u(31));
  f.body_temp = static_cast<std::uint16_t>(u(4) == 0 ? telemetry::kInvalidU16 : 3000 + u(1300));
  f.gsr = static_cast<std::uint16_t>(u(4) == 0 ? telemetry::kInvalidU16 : u(10001));
  f.amb_temp = static_cast<std::int16_t>(static_cast<int>(u(9001)) - 3000);
  f.humidity = static_cast<std::uint8_t>(u(101));
  f.light = static_cast<std::uint16_t>(u(65535));
  f.co2 = static_cast<std::uint16_t>(u(10001));
  f.voc = static_cast<std::uint16_t>(u(10001));
  f.sound = static_cast<std::uint8_t>(u(141));
  f.battery = static_cast<std::uint8_t>(u(101));
  return f;
}

Outcome codec() {
  Outcome o;
  const std::string check = "123456789";
  const auto crc = telemetry::crc16_ccitt_false(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(check.data()), check.size()));
  o.require(crc == kCrcCheck, "CRC check value mismatch");

  Rng rng(2024);
  int exact = 0;
  for (int i = 0; i < kCodecFrames; ++i) {
    const auto f = random_frame(rng);
    if (telemetry::frame_violation(f)) {
      --i;
      continue;
    }
    const auto bytes = telemetry::encode_frame(f);
    const auto back = telemetry::decode_frame(bytes);
    exact += std::holds_alternative<telemetry::DeviceFrame>(back) && std::get<telemetry::DeviceFrame>(back) == f &&
             telemetry::encode_frame(std::get<telemetry::DeviceFrame>(back)) == bytes;
  }
  o.require(exact == kCodecFrames, "round trip " + std::to_string(exact) + "/" + std::to_string(kCodecFrames));

  int detected = 0;
  for (int i = 0; i < kCorruptionCases; ++i) {
    auto f = random_frame(rng);
    if (telemetry::frame_violation(f)) {
      --i;
      continue;
    }
    auto bytes = telemetry::encode_frame(f);
    const auto pos = rng.next_u64() % telemetry::kFrameSize;
    const auto flip = static_cast<std::uint8_t>(1 + rng.next_u64() % 255);
    bytes[pos] = static_cast<std::uint8_t>(bytes[pos] ^ flip);
    detected += std::holds_alternative<telemetry::DecodeError>(telemetry::decode_frame(bytes));
  }
  o.require(detected == kCorruptionCases,
            "corruptions detected " + std::to_string(detected) + "/" + std::to_string(kCorruptionCases));
  if (o.pass) {
    o.detail = "crc 0x29B1, " + std::to_string(exact) + " exact round trips, " + std::to_string(detected) +
               " corruptions detected";
  }
  return o;
}

// --- end to end -----------------------------------------------------------

Outcome e2e() {
  Outcome o;
  const system::SystemConfig cfg;
  for (const auto* l : {&cfg.default_link, &cfg.ble_link}) {
    o.require(l->latency_ms + l->jitter_ms <= kMaxHopMs, "default hop latency over 50 ms");
  }
  const auto sc = scenario("stress_co2");
  const auto a = simulate(sc, "e2e_a", kE2eSeed);
  const auto b = simulate(sc, "e2e_b", kE2eSeed);
  const auto& r = a.report;
  VirtualMs worst = -1;
  std::size_t autos = 0;
  for (const auto& c : r.commands) {
    if (c.type != "ESTOP" || c.source != "auto") continue;
    ++autos;
    o.require(c.latency_ms.has_value(), "auto ESTOP " + c.cmd_id + " never confirmed");
    if (c.latency_ms) worst = std::max(worst, *c.latency_ms);
  }
  o.require(autos >= 1, "no auto ESTOP issued");
  o.require(worst >= 0 && worst <= kAutoEstopWithinMs, "latency " + std::to_string(worst) + " ms");
  const auto m = r.machines.find("m1");
  o.require(m != r.machines.end() && m->second.mode == "EMERGENCY_STOP" && m->second.latched, "m1 not latched");
  const auto ha = file_sha(g_scratch / "e2e_a" / "events.jsonl");
  const auto hb = file_sha(g_scratch / "e2e_b" / "events.jsonl");
  o.require(ha == hb && r.event_log_sha256 == b.report.event_log_sha256, "event logs differ between runs");
  if (o.pass) o.detail = "worst ESTOP latency " + std::to_string(worst) + " ms, log sha256 " + ha.substr(0, 12);
  return o;
}

Outcome button() {
  Outcome o;
  const auto run = simulate(scenario("button_press"));
  const auto& r = run.report;
  VirtualMs latency = -1;
  for (const auto& c : r.commands) {
    if (c.source != "device_button" || !c.worker_id || !c.stop_ts) continue;
    const auto pressed = r.first_button_frame.find(*c.worker_id);
    if (pressed == r.first_button_frame.end()) continue;
    latency = *c.stop_ts - pressed->second;
    break;
  }
  o.require(latency >= 0, "no confirmed button stop");
  o.require(latency <= kButtonWithinMs, "button to stop " + std::to_string(latency) + " ms");
  o.require(r.machines.at("m1").mode == "EMERGENCY_STOP", "machine not stopped");
  if (o.pass) o.detail = "press to EMERGENCY_STOP " + std::to_string(latency) + " ms";
  return o;
}

Outcome loss() {
  Outcome o;
  auto sc = scenario("lossy_links");
  const auto ble = sc.links.find("ble:w1");
  const auto cmd = sc.links.find("machine:m1");
  o.require(ble != sc.links.end() && ble->second.value("drop_prob", 0.0) >= kLossRate, "telemetry drop below 20%");
  double cmd_drop = 0;
  if (cmd != sc.links.end()) {
    for (const auto& d : system::link_fault_from_json(cmd->second, "links.machine:m1", {}).topic_drops) {
      if (d.filter.find("/cmd") != std::string::npos) cmd_drop = std::max(cmd_drop, d.drop_prob);
    }
  }
  o.require(cmd_drop >= kLossRate, "command drop below 20%");
  std::uint64_t lost = 0;
  std::uint64_t retrans = 0;
  for (auto seed : kLossSeeds) {
    const auto run = simulate(sc, "", seed);
    const auto& m = run.report.machines.at("m1");
    const auto s = std::to_string(seed);
    o.require(m.mode == "EMERGENCY_STOP" && m.latched, "seed " + s + ": machine " + m.mode);
    o.require(m.state_changes == 1, "seed " + s + ": " + std::to_string(m.state_changes) + " STATE_CHANGE");
    o.require(m.transitions == 1, "seed " + s + ": controller transitions " + std::to_string(m.transitions));
    lost += run.report.stats["gateways"]["w1"]["ble_lost"].get<std::uint64_t>();
    retrans += run.report.stats["bus"]["retransmissions"].get<std::uint64_t>();
  }
  o.require(lost > 0 && retrans > 0, "fault injection had no effect");
  if (o.pass) {
    o.detail = std::to_string(std::size(kLossSeeds)) + " seeds latched once; " + std::to_string(lost) +
               " frames lost, " + std::to_string(retrans) + " retransmissions";
  }
  return o;
}

// --- watchdog -------------------------------------------------------------

enum class Ev { EstopA, EstopB, ResetOpC, ResetOpD, ResetAuto, Heartbeat, Silence, Garbage };
constexpr Ev kEvents[] = {Ev::EstopA, Ev::EstopB, Ev::ResetOpC, Ev::ResetOpD,
                          Ev::ResetAuto, Ev::Heartbeat, Ev::Silence, Ev::Garbage};

std::optional<machine::EstopCommand> command_of(Ev e) {
  using machine::CommandSource;
  using machine::CommandType;
  auto make = [](char c, CommandType t, CommandSource s) {
    return machine::EstopCommand{std::string(32, c), t, 0, "", s};
  };
  switch (e) {
    case Ev::EstopA: return make('a', CommandType::Estop, CommandSource::Auto);
    case Ev::EstopB: return make('b', CommandType::Estop, CommandSource::DeviceButton);
    case Ev::ResetOpC: return make('c', CommandType::Reset, CommandSource::Operator);
    case Ev::ResetOpD: return make('d', CommandType::Reset, CommandSource::Operator);
    case Ev::ResetAuto: return make('e', CommandType::Reset, CommandSource::Auto);
    default: return std::nullopt;
  }
}

struct TraceState {
  machine::MachineState st;
  VirtualMs now = 0;
};

TraceState step(TraceState s, Ev e, VirtualMs silence_ms) {
  if (e == Ev::Silence) {
    s.now += silence_ms;
    s.st = machine::tick(s.st, s.now);
    return s;
  }
  s.now += 100;
  if (e == Ev::Heartbeat) {
    s.st = machine::on_heartbeat(s.st, s.now);
  } else if (e == Ev::Garbage) {
    s.st = machine::handle_payload(s.st, "{", s.now).state;
  } else {
    s.st = machine::handle_command(s.st, *command_of(e), s.now).state;
  }
  s.st = machine::tick(s.st, s.now);
  return s;
}

Outcome watchdog() {
  Outcome o;
  const machine::ControllerConfig cc;
  const VirtualMs silence = cc.watchdog_ms + 500;

  // Live partition in the full system, then an operator reset.
  auto sc = scenario("watchdog_partition");
  VirtualMs part_len = 0;
  for (const auto& seg : sc.workers.at(0).script.segments) {
    if (const auto* w = std::get_if<device::LinkFaultWindow>(&seg); w && w->link == "machine:m1") {
      part_len = static_cast<VirtualMs>((w->end_s - w->start_s) * 1000);
    }
  }
  o.require(part_len > kPartitionMs, "partition not longer than 3 s");
  const auto with_reset = simulate(sc).report.machines.at("m1");
  o.require(with_reset.mode == "RUNNING" && with_reset.transitions == 2,
            "with reset: " + with_reset.mode + " after " + std::to_string(with_reset.transitions) + " transitions");
  sc.operator_actions.clear();
  const auto held = simulate(sc).report.machines.at("m1");
  o.require(held.mode == "SAFE_STOP" && held.latched && held.last_cause == "WATCHDOG" && held.transitions == 1,
            "without reset: " + held.mode);

  // Every sequence over the input alphabet up to the pinned length.
  std::size_t traces = 0;
  std::vector<Ev> trace;
  std::function<void(TraceState)> rec = [&](TraceState s) {
    ++traces;
    o.require(s.st.latched == (s.st.mode != machine::MachineMode::Running), "latched flag disagrees with mode");
    o.require(step(s, Ev::Silence, silence).st.mode != machine::MachineMode::Running, "silence left machine running");
    if (static_cast<int>(trace.size()) == kTraceLength || !o.pass) return;
    for (Ev e : kEvents) {
      const auto next = step(s, e, silence);
      if (s.st.latched && next.st.mode == machine::MachineMode::Running) {
        const auto c = command_of(e);
        const bool op_reset = c && c->type == machine::CommandType::Reset &&
                              c->source == machine::CommandSource::Operator && !s.st.seen(c->cmd_id);
        o.require(op_reset, "unlatched without operator RESET");
      }
      trace.push_back(e);
      rec(next);
      trace.pop_back();
    }
  };
  rec(TraceState{machine::initial_state("m1", 0), 0});
  o.require(traces == 299593u, "trace count " + std::to_string(traces));
  if (o.pass) {
    o.detail = "partition " + std::to_string(part_len) + " ms -> SAFE_STOP held until RESET; " +
               std::to_string(traces) + " traces";
  }
  return o;
}

// --- decision properties ----------------------------------------------------

telemetry::WorkerTelemetry sample(VirtualMs t, double hr, double gsr) {
  telemetry::WorkerTelemetry s;
  s.worker_id = "w";
  s.site_id = "plant";
  s.recv_ts = t;
  s.frame.seq = static_cast<std::uint16_t>(t / 1000);
  s.frame.t_ms = static_cast<std::uint32_t>(t);
  s.frame.vitals = {hr, 98.0, 36.6, gsr};
  s.frame.env = {22, 45, 300, 400, 100, 50};
  return s;
}

// Calibrates at `base`, then holds `hr` for one window; returns the score.
double score_after(const engine::EngineConfig& cfg, double base_hr, double gsr, double hr) {
  engine::WorkerSession s(cfg, "w", 0);
  const int calib = static_cast<int>(cfg.calibration_s);
  const int total = calib + static_cast<int>(cfg.window_s + cfg.step_s);
  double score = -1;
  for (int k = 0; k < total; ++k) {
    auto u = s.ingest(sample(k * 1000, k < calib ? base_hr : hr, gsr));
    if (u.assessment && !u.assessment->calibrating) score = u.assessment->score;
  }
  return score;
}

Outcome decisions() {
  Outcome o;
  const engine::EngineConfig cfg;
  Rng rng(1337);
  int cases = 0;
  for (; cases < kPropertyCases && o.pass; ++cases) {
    const double base = rng.uniform(50, 100);
    const double gsr = rng.uniform(1, 15);
    const double h1 = rng.uniform(base * 0.8, base * 2.0);
    const double h2 = h1 + rng.uniform(0, 40);
    const double s1 = score_after(cfg, base, gsr, h1);
    const double s2 = score_after(cfg, base, gsr, h2);
    o.require(s1 >= 0 && s1 <= 1 && s2 >= 0 && s2 <= 1, "score outside [0,1]");
    o.require(s2 >= s1, "score fell as mean HR rose");
  }

  // Level L permits class c iff c <= e - L; L4 permits nothing.
  for (int l = 0; l < 5; ++l) {
    for (int c = 0; c < 5; ++c) {
      const bool want = l < 4 && c <= 4 - l;
      const auto v = engine::assess_suitability(static_cast<engine::StressLevel>(l), static_cast<engine::RiskClass>(c));
      o.require(v.allowed == want, "suitability table L" + std::to_string(l) + " class " + std::to_string(c));
      for (int l2 = l; l2 < 5; ++l2) {
        const auto w = engine::assess_suitability(static_cast<engine::StressLevel>(l2), static_cast<engine::RiskClass>(c));
        o.require(!w.allowed || v.allowed, "suitability not antitone");
      }
    }
  }

  int episodes_total = 0;
  for (int i = 0; i < 200 && o.pass; ++i) {
    engine::ThresholdMonitor m(cfg, "w");
    int onsets = 0;
    VirtualMs t = 0;
    const int episodes = 1 + static_cast<int>(rng.next_u64() % 4);
    for (int e = 0; e < episodes; ++e) {
      const int held = 10 + static_cast<int>(rng.next_u64() % 100);
      const int gap = 1 + static_cast<int>(rng.next_u64() % 5);
      for (int k = 0; k < held + gap; ++k, t += 1000) {
        auto s = sample(t, 72, 5);
        if (k < held) s.frame.env.co2 = 1500;
        onsets += static_cast<int>(m.on_sample(s).size());
      }
    }
    episodes_total += episodes;
    o.require(onsets == episodes, "debounce: " + std::to_string(onsets) + " onsets for " + std::to_string(episodes));
  }
  if (o.pass) {
    o.detail = std::to_string(cases) + " score cases, 25 suitability pairs, " + std::to_string(episodes_total) +
               " debounce episodes";
  }
  return o;
}

// --- replay -----------------------------------------------------------------

Outcome replay() {
  Outcome o;
  std::size_t n = 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(g_scenarios)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto name = f.stem().string();
    const auto run = simulate(system::load_system_scenario(f.string()), "replay_" + name);
    const auto r = server::replay_file(g_scratch / ("replay_" + name) / "events.jsonl");
    o.require(server::state_hash(r.state) == server::state_hash(run.final_state), name + ": replay differs from live");
    o.require(run.report.state_hash == server::state_hash(r.state), name + ": report hash differs");
    o.require(!r.truncated_tail && r.log_digest == run.report.event_log_sha256, name + ": log digest differs");
    const auto snap = server::replay_file(g_scratch / ("replay_" + name), true);
    o.require(server::state_hash(snap.state) == server::state_hash(run.final_state), name + ": snapshot replay differs");
    ++n;
  }
  o.require(n >= 9, "only " + std::to_string(n) + " bundled scenarios");
  if (o.pass) o.detail = std::to_string(n) + " scenarios replay to the live state hash";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  g_scenarios = argc > 1 ? fs::path(argv[1]) : fs::path(SWSK_SCENARIOS);
  g_scratch = fs::temp_directory_path() / ("swsk_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_scratch);

  criterion("risk-graph table", kRiskTableLimitS, risk_table);
  criterion("frame codec", kCodecLimitS, codec);
  criterion("end-to-end auto e-stop", kE2eLimitS, e2e);
  criterion("button path", kButtonLimitS, button);
  criterion("loss tolerance", kLossLimitS, loss);
  criterion("watchdog fail-safe", kWatchdogLimitS, watchdog);
  criterion("decision properties", kDecisionLimitS, decisions);
  criterion("replay determinism", kReplayLimitS, replay);

  fs::remove_all(g_scratch);
  std::cout << (g_failed == 0 ? "all criteria met" : std::to_string(g_failed) + " criteria failed") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
