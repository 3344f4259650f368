#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/fake_transport.hpp"
#include "swsk/bus/broker.hpp"
#include "swsk/bus/topic.hpp"
#include "swsk/core/errors.hpp"
#include "swsk/machine/node.hpp"
#include "swsk/server/event_log.hpp"
#include "swsk/server/server.hpp"
#include "swsk/server/state.hpp"

namespace swsk::server {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const engine::RiskParams kPress{telemetry::Severity::S2, telemetry::Frequency::F2, telemetry::Avoidance::P2};

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("swsk_server_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

telemetry::WorkerTelemetry sample(const std::string& worker, std::uint64_t gseq, std::uint32_t t_ms) {
  telemetry::WorkerTelemetry t;
  t.worker_id = worker;
  t.site_id = "plant";
  t.recv_ts = t_ms;
  t.gateway_seq = gseq;
  t.frame.seq = static_cast<std::uint16_t>(gseq);
  t.frame.t_ms = t_ms;
  t.frame.vitals = {72.0, 98.0, 36.6, 5.0};
  t.frame.env = {22, 45, 300, 400, 100, 50};
  t.frame.battery = 90;
  return t;
}

std::vector<EventRecord> of_kind(const EventLog& log, EventKind k) {
  std::vector<EventRecord> out;
  for (const auto& e : log.records()) {
    if (e.kind == k) out.push_back(e);
  }
  return out;
}

TEST(Registry, AssignReplacesBothSides) {
  Registry r;
  r.register_worker("w1", json::object(), 0);
  r.register_worker("w2", json::object(), 0);
  r.register_machine("m1", kPress);
  r.register_machine("m2", kPress);
  r.assign("w1", "m1");
  r.assign("w2", "m1");
  EXPECT_FALSE(r.machine_of("w1"));
  EXPECT_EQ(r.worker_on("m1"), "w2");
  r.assign("w2", "m2");
  EXPECT_FALSE(r.worker_on("m1"));
  EXPECT_EQ(r.machine_of("w2"), "m2");
  EXPECT_NO_THROW(r.check_invariants());
  EXPECT_THROW(r.assign("w9", "m1"), InvariantViolation);
  EXPECT_THROW(r.assign("w1", "m9"), InvariantViolation);
  r.unassign("w2");
  EXPECT_FALSE(r.worker_on("m2"));
  EXPECT_EQ(r.machines().at("m1").risk_class, engine::classify_risk(kPress));
}

TEST(EventLog, SequenceStartsAtOneAndRejectsInapplicableEvents) {
  EventLog log;
  EXPECT_EQ(log.last_seq(), 0u);
  const auto& e = log.append(5, EventKind::RegistryChange, {{"op", "register_worker"}, {"worker_id", "w1"}, {"meta", json::object()}});
  EXPECT_EQ(e.event_seq, 1u);
  const auto digest = log.digest();
  EXPECT_ANY_THROW(log.append(6, EventKind::RegistryChange, {{"op", "assign"}, {"worker_id", "w1"}, {"machine_id", "nope"}}));
  EXPECT_EQ(log.last_seq(), 1u);
  EXPECT_EQ(log.digest(), digest);
  EXPECT_EQ(log.append(7, EventKind::Notification, {{"worker_id", "w1"}, {"severity", "WARN"}, {"code", "X"}, {"text", ""}, {"ts", 7}}).event_seq, 2u);
}

// Builds a log with registry churn, telemetry and notifications.
void populate(EventLog& log, int n) {
  log.append(0, EventKind::RegistryChange, {{"op", "register_machine"}, {"machine_id", "m1"}, {"params", risk_params_json(kPress)}});
  log.append(0, EventKind::RegistryChange, {{"op", "register_worker"}, {"worker_id", "w1"}, {"meta", json::object()}});
  log.append(0, EventKind::RegistryChange, {{"op", "assign"}, {"worker_id", "w1"}, {"machine_id", "m1"}});
  for (int k = 1; k <= n; ++k) {
    auto p = telemetry::to_json(sample("w1", static_cast<std::uint64_t>(k), static_cast<std::uint32_t>(k * 1000)));
    log.append(k * 1000, EventKind::Telemetry, p);
    if (k % 7 == 0) {
      log.append(k * 1000, EventKind::Notification,
                 {{"worker_id", "w1"}, {"severity", "WARN"}, {"code", "ENV_CO2"}, {"text", "co2"}, {"ts", k * 1000}});
    }
  }
}

TEST(Replay, EmptyLogGivesEmptyState) {
  std::istringstream in("");
  auto r = replay(in);
  EXPECT_EQ(r.last_seq, 0u);
  EXPECT_EQ(r.replayed, 0u);
  EXPECT_EQ(r.state, ServerState{});
  EXPECT_FALSE(r.truncated_tail);
}

TEST(Replay, FileRoundTripMatchesLiveStateAndDigest) {
  const auto dir = temp_dir("roundtrip");
  {
    EventLog log({dir, 10000, true});
    populate(log, 50);
    log.flush();
    auto r = replay_file(dir);
    EXPECT_EQ(r.state, log.state());
    EXPECT_EQ(state_hash(r.state), state_hash(log.state()));
    EXPECT_EQ(r.log_digest, log.digest());
    EXPECT_EQ(r.last_seq, log.last_seq());
  }
  fs::remove_all(dir);
}

TEST(Replay, TruncatedFinalLineIsSkipped) {
  EventLog log;
  populate(log, 10);
  std::string text;
  for (const auto& e : log.records()) text += to_json(e).dump() + "\n";
  const auto cut = text.substr(0, text.size() - 20);
  std::istringstream in(cut);
  auto r = replay(in);
  EXPECT_TRUE(r.truncated_tail);
  EXPECT_EQ(r.last_seq, log.last_seq() - 1);
}

TEST(Replay, MidLogCorruptionAndGapsAreErrors) {
  EventLog log;
  populate(log, 10);
  std::vector<std::string> lines;
  for (const auto& e : log.records()) lines.push_back(to_json(e).dump());

  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& l : v) s += l + "\n";
    return s;
  };
  auto corrupt = lines;
  corrupt[4] = "{not json";
  std::istringstream in1(join(corrupt));
  try {
    replay(in1);
    FAIL() << "expected ReplayError";
  } catch (const ReplayError& e) {
    EXPECT_EQ(e.event_seq(), 5u);
  }

  auto gap = lines;
  gap.erase(gap.begin() + 6);
  std::istringstream in2(join(gap));
  EXPECT_THROW(replay(in2), ReplayError);
}

TEST(Replay, SnapshotStartEqualsGenesisReplay) {
  const auto dir = temp_dir("snapshot");
  {
    EventLog log({dir, 25, true});
    populate(log, 60);
    log.flush();
    auto full = replay_file(dir, false);
    auto snap = replay_file(dir, true);
    ASSERT_TRUE(snap.snapshot_seq.has_value());
    EXPECT_GT(*snap.snapshot_seq, 0u);
    EXPECT_LT(snap.replayed, full.replayed);
    EXPECT_EQ(snap.state, full.state);
    EXPECT_EQ(snap.last_seq, full.last_seq);
  }
  fs::remove_all(dir);
}

struct FakeRig {
  sim::Scheduler sched;
  testsupport::FakeTransport t;
  EventLog log;
  SafetyServer server{ServerConfig{}, t, sched, log};

  FakeRig() { server.start(); }
  void telemetry(const telemetry::WorkerTelemetry& s) {
    t.inject(bus::topics::telemetry("plant", s.worker_id), telemetry::to_json(s).dump());
  }
};

TEST(Server, UnknownWorkerIsQuarantined) {
  FakeRig r;
  r.telemetry(sample("ghost", 1, 0));
  r.telemetry(sample("ghost", 2, 1000));
  EXPECT_TRUE(of_kind(r.log, EventKind::Telemetry).empty());
  const auto n = of_kind(r.log, EventKind::Notification);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].payload["code"], "UNKNOWN_WORKER");
  EXPECT_EQ(r.server.counters().telemetry_quarantined, 2u);
}

TEST(Server, MalformedAndMismatchedTelemetryRejected) {
  FakeRig r;
  r.server.register_worker("w1");
  r.t.inject(bus::topics::telemetry("plant", "w1"), "{oops");
  r.t.inject(bus::topics::telemetry("plant", "w1"), telemetry::to_json(sample("w2", 1, 0)).dump());
  EXPECT_EQ(r.server.counters().telemetry_malformed, 2u);
  EXPECT_TRUE(of_kind(r.log, EventKind::Telemetry).empty());
}

TEST(Server, DuplicateGatewaySeqDropped) {
  FakeRig r;
  r.server.register_worker("w1");
  r.telemetry(sample("w1", 1, 0));
  r.telemetry(sample("w1", 1, 0));
  r.telemetry(sample("w1", 2, 1000));
  EXPECT_EQ(of_kind(r.log, EventKind::Telemetry).size(), 2u);
  EXPECT_EQ(r.server.counters().telemetry_duplicates, 1u);
}

TEST(Server, ReceiveTimeIsServerClock) {
  FakeRig r;
  r.server.register_worker("w1");
  r.sched.run_until(4321);
  r.telemetry(sample("w1", 1, 17));
  const auto t = of_kind(r.log, EventKind::Telemetry);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].payload["recv_ts"], 4321);
  EXPECT_EQ(t[0].payload["gateway_ts"], 17);
  EXPECT_EQ(r.server.history("w1", 4000, 5000).size(), 1u);
  EXPECT_TRUE(r.server.history("w1", 0, 4000).empty());
  EXPECT_THROW(r.server.history("nobody", 0, 1), NotFound);
}

TEST(Server, HeartbeatsOncePerSecond) {
  FakeRig r;
  r.sched.run_until(9999);
  int beats = 0;
  for (const auto& p : r.t.published) {
    if (p.topic == bus::topics::heartbeat("plant")) {
      ++beats;
      EXPECT_EQ(p.qos, bus::QoS::AtMostOnce);
    }
  }
  EXPECT_GE(beats, 9);
  EXPECT_LE(beats, 11);
}

TEST(Server, IssueEstopUnknownMachineThrows) {
  FakeRig r;
  EXPECT_THROW(r.server.issue_estop("m9", engine::CommandSource::Operator, "x"), NotFound);
  EXPECT_THROW(r.server.issue_reset("m9", "x"), NotFound);
  EXPECT_TRUE(r.log.records().empty());
}

TEST(Server, UnconfirmedCommandEscalates) {
  FakeRig r;
  r.server.register_machine("m1", kPress);
  const auto id = r.server.issue_estop("m1", engine::CommandSource::Operator, "test");
  r.sched.run_until(4999);
  EXPECT_TRUE(of_kind(r.log, EventKind::Notification).empty());
  r.sched.run_until(5000);
  const auto n = of_kind(r.log, EventKind::Notification);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].payload["code"], "COMMAND_UNCONFIRMED");
  EXPECT_EQ(n[0].payload["severity"], "CRITICAL");
  EXPECT_TRUE(r.log.state().commands.at(id).escalated);
}

TEST(Server, SustainedLowSpo2StopsAssignedMachineOnce) {
  FakeRig r;
  r.server.register_worker("w1");
  r.server.register_machine("m1", kPress);
  r.server.assign("w1", "m1");
  for (std::uint32_t k = 0; k < 30; ++k) {
    r.sched.run_until(k * 1000);
    auto s = sample("w1", k + 1, k * 1000);
    if (k >= 5) s.frame.vitals.spo2 = 85.0;
    r.telemetry(s);
  }
  const auto issued = of_kind(r.log, EventKind::CommandIssued);
  ASSERT_EQ(issued.size(), 1u);
  EXPECT_EQ(issued[0].payload["source"], "auto");
  EXPECT_EQ(issued[0].payload["machine_id"], "m1");
  EXPECT_EQ(issued[0].payload["worker_id"], "w1");
  size_t cmds = 0;
  for (const auto& p : r.t.published) {
    if (p.topic == bus::topics::command("plant", "m1")) {
      ++cmds;
      EXPECT_EQ(p.qos, bus::QoS::AtLeastOnce);
    }
  }
  EXPECT_EQ(cmds, 1u);
}

TEST(Server, SuitabilityQueries) {
  FakeRig r;
  r.server.register_worker("w1");
  r.server.register_machine("m1", kPress);
  auto v = r.server.suitability({"w1", std::nullopt, "m1", std::nullopt});
  EXPECT_EQ(v.stress_level, engine::StressLevel::L0);
  EXPECT_TRUE(v.allowed);
  EXPECT_FALSE(v.reasons.empty());
  v = r.server.suitability({std::nullopt, engine::StressLevel::L4, std::nullopt, engine::RiskClass::a});
  EXPECT_FALSE(v.allowed);
  EXPECT_THROW(r.server.suitability({"nobody", std::nullopt, "m1", std::nullopt}), NotFound);
  EXPECT_THROW(r.server.suitability({std::nullopt, std::nullopt, "m1", std::nullopt}), std::invalid_argument);
}

struct BrokerRig {
  sim::Scheduler sched;
  bus::Broker broker{sched};
  bus::BusTransport st{broker, broker.connect("server", {})};
  bus::BusTransport mt{broker, broker.connect("machine", {})};
  EventLog log;
  SafetyServer server{ServerConfig{}, st, sched, log};
  machine::MachineNode node{"plant", "m1", mt, sched};

  BrokerRig() {
    node.start();
    server.start();
    server.register_machine("m1", kPress);
  }
};

TEST(ServerWithMachine, EstopConfirmedOnceAndDuplicateChangesNothing) {
  BrokerRig r;
  r.sched.run_until(2000);
  const auto id = r.server.issue_estop("m1", engine::CommandSource::Operator, "test");
  r.sched.run_until(3000);
  EXPECT_EQ(r.node.state().mode, machine::MachineMode::EmergencyStop);
  EXPECT_TRUE(r.server.in_flight().empty());
  const auto acks = of_kind(r.log, EventKind::CommandAcked);
  ASSERT_EQ(acks.size(), 1u);
  EXPECT_EQ(acks[0].payload["cmd_id"], id);
  EXPECT_EQ(acks[0].payload["status"], "applied");

  // The same command redelivered by the bus.
  r.st.publish(bus::topics::command("plant", "m1"),
               machine::to_json(machine::EstopCommand{id, machine::CommandType::Estop, 2000, "test",
                                                      engine::CommandSource::Operator})
                   .dump(),
               bus::QoS::AtLeastOnce, false);
  r.sched.run_until(8000);
  EXPECT_EQ(of_kind(r.log, EventKind::StateChange).size(), 1u);
  EXPECT_TRUE(of_kind(r.log, EventKind::Notification).empty());
  EXPECT_EQ(r.log.state().registry.machines().at("m1").status.mode, machine::MachineMode::EmergencyStop);
}

TEST(ServerWithMachine, ResetAfterEstop) {
  BrokerRig r;
  r.sched.run_until(1000);
  r.server.issue_estop("m1", engine::CommandSource::Operator, "test");
  r.sched.run_until(2000);
  r.server.issue_reset("m1", "clear");
  r.sched.run_until(3000);
  EXPECT_EQ(r.node.state().mode, machine::MachineMode::Running);
  EXPECT_EQ(of_kind(r.log, EventKind::StateChange).size(), 2u);
  EXPECT_EQ(of_kind(r.log, EventKind::CommandAcked).size(), 2u);
}

TEST(ServerWithMachine, PausedServerTripsWatchdog) {
  BrokerRig r;
  r.sched.run_until(5000);
  EXPECT_EQ(r.node.state().mode, machine::MachineMode::Running);
  r.server.pause_for(4000);
  r.sched.run_until(8999);
  EXPECT_EQ(r.node.state().mode, machine::MachineMode::SafeStop);
  // The server hears about it only once it resumes.
  EXPECT_TRUE(of_kind(r.log, EventKind::StateChange).empty());
  r.sched.run_until(9500);
  const auto sc = of_kind(r.log, EventKind::StateChange);
  ASSERT_EQ(sc.size(), 1u);
  EXPECT_EQ(sc[0].payload["to"], "SAFE_STOP");
  EXPECT_EQ(sc[0].payload["last_cause"], machine::kWatchdogCause);
  // Heartbeats are back but the stop stays latched.
  r.sched.run_until(15000);
  EXPECT_EQ(r.node.state().mode, machine::MachineMode::SafeStop);
  EXPECT_TRUE(r.node.state().latched);
}

}  // namespace
}  // namespace swsk::server
