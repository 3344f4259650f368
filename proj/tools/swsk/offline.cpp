#include "offline.hpp"

#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "swsk/core/errors.hpp"
#include "swsk/machine/controller.hpp"
#include "swsk/server/event_log.hpp"
#include "swsk/system/evaluate.hpp"
#include "swsk/system/simulation.hpp"

namespace swsk::cli {

int run_simulate(const SimulateArgs& a) {
  system::SystemConfig config;
  system::SystemScenario scenario;
  try {
    config = resolve_config(a.config);
    scenario = system::load_system_scenario(a.scenario);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  system::SimOptions opts;
  opts.out_dir = a.out_dir;
  opts.seed = a.seed;
  opts.keep_records = true;
  system::SimRun run;
  try {
    run = system::run_simulation(std::move(scenario), config, opts);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  std::cerr << system::format_human(run.report);
  std::cerr << "report: " << (std::filesystem::path(a.out_dir) / "report.json").string() << "\n";
  return run.report.pass ? kOk : kExpectationFailed;
}

int run_evaluate(const EvaluateArgs& a) {
  std::ifstream in(a.csv);
  if (!in) {
    std::cerr << "error: cannot open " << a.csv << "\n";
    return kInputError;
  }
  engine::EngineConfig engine;
  try {
    engine = resolve_config(a.config).server.engine;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  std::ofstream file;
  if (a.out) {
    file.open(*a.out);
    if (!file) {
      std::cerr << "error: cannot write " << *a.out << "\n";
      return kInputError;
    }
  }
  std::ostream& out = a.out ? static_cast<std::ostream&>(file) : std::cout;
  system::EvalSummary s;
  try {
    s = system::evaluate_csv(in, out, engine);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  std::cerr << "rows=" << s.rows << " allowed=" << s.allowed << " denied=" << s.denied << " errors=" << s.errors;
  for (const auto& [cls, n] : s.by_class) std::cerr << " class_" << cls << "=" << n;
  std::cerr << "\n";
  return s.errors > 0 ? kInputError : kOk;
}

nlohmann::json state_summary(const server::ServerState& st) {
  nlohmann::json machines = nlohmann::json::object();
  for (const auto& [id, m] : st.registry.machines()) {
    machines[id] = {{"mode", machine::to_string(m.status.mode)},
                    {"latched", m.status.latched},
                    {"last_cause", m.status.last_cause},
                    {"risk_class", telemetry::to_string(m.risk_class)}};
  }
  nlohmann::json workers = nlohmann::json::object();
  for (const auto& [id, w] : st.registry.workers()) {
    const auto a = st.assessments.find(id);
    const auto mach = st.registry.machine_of(id);
    workers[id] = {{"assigned_machine", mach ? nlohmann::json(*mach) : nlohmann::json(nullptr)},
                   {"stress_level", a == st.assessments.end() ? nlohmann::json(nullptr)
                                                              : nlohmann::json(engine::to_string(a->second.level))}};
  }
  std::size_t issued = 0;
  for (const auto& [id, c] : st.commands) issued += c.type == "ESTOP";
  return {{"last_event_seq", st.last_event_seq},
          {"machines", machines},
          {"workers", workers},
          {"alert_counts", st.alert_counts},
          {"notification_counts", st.notification_counts},
          {"commands", st.commands.size()},
          {"estops", issued},
          {"state_hash", server::state_hash(st)}};
}

int run_replay(const ReplayArgs& a) {
  try {
    auto r = server::replay_file(a.path, a.use_snapshot);
    auto out = state_summary(r.state);
    out["replayed"] = r.replayed;
    out["truncated_tail"] = r.truncated_tail;
    if (r.truncated_tail) out["tail_error"] = r.tail_error;
    out["snapshot_seq"] = r.snapshot_seq ? nlohmann::json(*r.snapshot_seq) : nlohmann::json(nullptr);
    if (!a.use_snapshot || !r.snapshot_seq) out["log_sha256"] = r.log_digest;
    std::cout << out.dump(2) << "\n";
    if (r.truncated_tail) std::cerr << "warning: final line unreadable, stopped at event_seq " << r.last_seq << "\n";
    return kOk;
  } catch (const server::ReplayError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace swsk::cli
