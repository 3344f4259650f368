#include <CLI11.hpp>

#include <iostream>

#include "common.hpp"
#include "live.hpp"
#include "offline.hpp"

int main(int argc, char** argv) {
  using namespace swsk::cli;
  CLI::App app{"swsk: wearable safety system twin"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::string> config;
  app.add_option("--config", config, "System config JSON (falls back to $SWSK_CONFIG)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario end to end under the virtual clock");
  simulate->add_option("--scenario,scenario", sim.scenario, "System scenario JSON")->required();
  simulate->add_option("--seed", sim.seed, "Override every seed in the scenario");
  simulate->add_option("--out-dir", sim.out_dir, "Directory for events.jsonl and report.json")->capture_default_str();

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Batch suitability verdicts from a CSV");
  evaluate->add_option("csv", eval.csv, "Input CSV")->required();
  evaluate->add_option("--out", eval.out, "Write the verdict CSV here instead of stdout");

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "Rebuild server state from an event log");
  replay->add_option("path", rep.path, "events.jsonl or its directory")->required();
  replay->add_flag("--snapshot", rep.use_snapshot, "Start from snapshot.json when present");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Run the safety server with its HTTP API");
  auto* embedded = serve->add_flag("--embedded-bus", "Host the bus in-process with an MQTT listener (default)");
  serve->add_option("--broker", srv.broker, "Use an external MQTT broker at host:port instead")->excludes(embedded);
  serve->add_option("--http", srv.http, "HTTP listen address")->capture_default_str();
  serve->add_option("--mqtt", srv.mqtt, "MQTT listen address of the embedded bus")->capture_default_str();
  serve->add_option("--data-dir", srv.data_dir, "Event log directory")->capture_default_str();
  serve->add_option("--scenario", srv.scenario, "Register the scenario's workers, machines and assignments");

  LiveArgs dev;
  auto* device = app.add_subcommand("device", "Run a wearable streaming frames from a scenario");
  device->add_option("--scenario", dev.scenario, "System scenario JSON")->required();
  device->add_option("--id", dev.id, "Worker id (optional when the scenario has one worker)");
  device->add_option("--broker", dev.broker, "MQTT broker host:port (default 127.0.0.1:1883)");

  LiveArgs gw;
  auto* gateway = app.add_subcommand("gateway", "Run a worker's phone relay");
  gateway->add_option("--id", gw.id, "Worker id")->required();
  gateway->add_option("--scenario", gw.scenario, "Scenario driving the phone IMU");
  gateway->add_option("--broker", gw.broker, "MQTT broker host:port (default 127.0.0.1:1883)");

  LiveArgs mach;
  auto* machine = app.add_subcommand("machine", "Run a machine controller");
  machine->add_option("--id", mach.id, "Machine id")->required();
  machine->add_option("--broker", mach.broker, "MQTT broker host:port (default 127.0.0.1:1883)");

  for (auto* role : {serve, device, gateway, machine}) {
    LiveArgs& la = role == serve ? srv : role == device ? dev : role == gateway ? gw : mach;
    role->add_option("--site", la.site, "Site id (overrides the config)");
    role->add_option("--duration-s", la.duration_s, "Stop after this many seconds; 0 waits for Ctrl-C");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  if (simulate->parsed()) {
    sim.config = config;
    return run_simulate(sim);
  }
  if (evaluate->parsed()) {
    eval.config = config;
    return run_evaluate(eval);
  }
  if (replay->parsed()) return run_replay(rep);
  for (auto* la : {static_cast<LiveArgs*>(&srv), &dev, &gw, &mach}) la->config = config;
  if (serve->parsed()) return run_serve(srv);
  if (device->parsed()) return run_device(dev);
  if (gateway->parsed()) return run_gateway(gw);
  if (machine->parsed()) return run_machine(mach);
  return kInputError;
}
