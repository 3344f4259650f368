#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "swsk/bus/broker.hpp"
#include "swsk/device/generator.hpp"
#include "swsk/gateway/gateway.hpp"
#include "swsk/machine/node.hpp"
#include "swsk/net/mqtt_bridge.hpp"
#include "swsk/net/mqtt_client.hpp"
#include "swsk/net/realtime.hpp"
#include "swsk/server/event_log.hpp"
#include "swsk/server/http_api.hpp"
#include "swsk/server/server.hpp"
#include "swsk/system/config.hpp"
#include "swsk/system/scenario.hpp"

namespace swsk::system {

// Wall-clock deployments of the same nodes the simulation wires together.

struct ServeOptions {
  SystemConfig config;
  /// Remote broker; absent runs the embedded broker and its MQTT listener.
  std::optional<net::MqttClientOptions> broker;
  std::string mqtt_host = "127.0.0.1";
  int mqtt_port = 1883;  // 0 picks a free port
  std::string http_host = "127.0.0.1";
  int http_port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> data_dir;
  /// Workers, machines and assignments to register at start.
  std::optional<SystemScenario> registry;
};

class LiveServer {
 public:
  /// Binds sockets and connects; throws net::ConnectError or std::runtime_error.
  explicit LiveServer(ServeOptions options);
  ~LiveServer();

  void start();
  void stop();
  int http_port() const { return http_port_; }
  int mqtt_port() const { return mqtt_port_; }
  net::RealtimeDriver& driver() { return *driver_; }
  server::SafetyServer& server() { return *server_; }

 private:
  ServeOptions options_;
  sim::Scheduler sched_;
  std::unique_ptr<net::RealtimeDriver> driver_;
  std::unique_ptr<bus::Broker> broker_;
  std::unique_ptr<net::MqttBridge> bridge_;
  std::unique_ptr<bus::Transport> transport_;
  std::unique_ptr<server::EventLog> log_;
  std::unique_ptr<server::SafetyServer> server_;
  std::unique_ptr<server::HttpApi> http_;
  std::function<void()> flush_;
  int http_port_ = 0;
  int mqtt_port_ = 0;
  bool started_ = false;
};

class LiveMachine {
 public:
  LiveMachine(std::string site, std::string machine_id, net::MqttClientOptions broker, machine::ControllerConfig config);
  ~LiveMachine();
  /// Throws net::ConnectError.
  void start();
  void stop();
  machine::MachineState state();

 private:
  sim::Scheduler sched_;
  net::RealtimeDriver driver_{sched_};
  net::MqttTransport transport_;
  machine::MachineNode node_;
};

// Phone role: frames arrive on the worker's frames topic, telemetry leaves
// on the telemetry topic. With a scenario, the phone IMU follows it.
class LiveGateway {
 public:
  LiveGateway(gateway::GatewayConfig config, net::MqttClientOptions broker,
              std::optional<device::ScenarioScript> imu_scenario = std::nullopt);
  ~LiveGateway();
  void start();
  void stop();
  gateway::GatewayStats stats();

 private:
  sim::Scheduler sched_;
  net::RealtimeDriver driver_{sched_};
  net::MqttTransport transport_;
  gateway::Gateway gateway_;
  std::optional<device::ImuSimulator> imu_;
  std::optional<device::ScenarioScript> script_;
  std::function<void()> poll_;
};

// Wearable role: emits encoded frames on the worker's frames topic at the
// scenario's sample rate until the scenario ends.
class LiveDevice {
 public:
  LiveDevice(std::string site, WorkerSpec worker, net::MqttClientOptions broker);
  ~LiveDevice();
  void start();
  void stop();
  bool done();
  std::size_t sent();

 private:
  sim::Scheduler sched_;
  net::RealtimeDriver driver_{sched_};
  net::MqttTransport transport_;
  std::string topic_;
  device::DeviceSimulator device_;
  std::function<void()> emit_;
  std::size_t sent_ = 0;
};

}  // namespace swsk::system
