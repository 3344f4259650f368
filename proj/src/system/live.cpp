#include "swsk/system/live.hpp"

#include "swsk/bus/topic.hpp"

namespace swsk::system {

LiveServer::LiveServer(ServeOptions options) : options_(std::move(options)) {
  driver_ = std::make_unique<net::RealtimeDriver>(sched_);
  if (options_.broker) {
    auto client = std::make_unique<net::MqttTransport>(*options_.broker, *driver_);
    client->connect();
    transport_ = std::move(client);
  } else {
    bus::BrokerConfig bc;
    bc.mode = bus::ClockMode::WallClock;
    bc.record_events = false;
    broker_ = std::make_unique<bus::Broker>(sched_, bc);
    transport_ = std::make_unique<bus::BusTransport>(*broker_, broker_->connect("server", {}));
    bridge_ = std::make_unique<net::MqttBridge>(*broker_, *driver_);
    mqtt_port_ = bridge_->listen(options_.mqtt_host, options_.mqtt_port);
  }
  if (options_.data_dir) std::filesystem::create_directories(*options_.data_dir);
  log_ = std::make_unique<server::EventLog>(server::EventLogOptions{options_.data_dir, 10000, false});
  server_ = std::make_unique<server::SafetyServer>(options_.config.server, *transport_, sched_, *log_);
  http_ = std::make_unique<server::HttpApi>(*server_, driver_->mutex());
  http_port_ = http_->bind(options_.http_host, options_.http_port);
}

LiveServer::~LiveServer() { stop(); }

void LiveServer::start() {
  if (started_) return;
  started_ = true;
  {
    std::lock_guard g(driver_->mutex());
    if (options_.registry) {
      for (const auto& m : options_.registry->machines) server_->register_machine(m.id, m.params);
      for (const auto& w : options_.registry->workers) {
        server_->register_worker(w.id, w.meta);
        if (w.machine) server_->assign(w.id, *w.machine);
      }
    }
    server_->start();
    flush_ = [this] {
      log_->flush();
      sched_.schedule_after(1000, [this] { flush_(); });
    };
    sched_.schedule_after(1000, [this] { flush_(); });
  }
  if (bridge_) bridge_->start();
  driver_->start();
  http_->start();
}

void LiveServer::stop() {
  if (!started_) return;
  started_ = false;
  http_->stop();
  if (bridge_) bridge_->stop();
  driver_->stop();
  if (auto* mqtt = dynamic_cast<net::MqttTransport*>(transport_.get())) mqtt->close();
  log_->flush();
}

LiveMachine::LiveMachine(std::string site, std::string machine_id, net::MqttClientOptions broker,
                         machine::ControllerConfig config)
    : transport_(std::move(broker), driver_), node_(std::move(site), std::move(machine_id), transport_, sched_, config) {}

LiveMachine::~LiveMachine() { stop(); }

void LiveMachine::start() {
  transport_.connect();
  {
    std::lock_guard g(driver_.mutex());
    node_.start();
  }
  driver_.start();
}

void LiveMachine::stop() {
  driver_.stop();
  transport_.close();
}

machine::MachineState LiveMachine::state() {
  std::lock_guard g(driver_.mutex());
  return node_.state();
}

LiveGateway::LiveGateway(gateway::GatewayConfig config, net::MqttClientOptions broker,
                         std::optional<device::ScenarioScript> imu_scenario)
    : transport_(std::move(broker), driver_),
      gateway_(std::move(config), transport_, [this] { return sched_.now(); }),
      script_(std::move(imu_scenario)) {
  if (script_) imu_.emplace(*script_, gateway_.config().worker_id);
}

LiveGateway::~LiveGateway() { stop(); }

void LiveGateway::start() {
  transport_.connect();
  {
    std::lock_guard g(driver_.mutex());
    const auto& cfg = gateway_.config();
    transport_.subscribe(bus::topics::device_link(cfg.site_id, cfg.worker_id), bus::QoS::AtMostOnce,
                         [this](const bus::Delivery& d) {
                           if (imu_ && script_) {
                             const double t = static_cast<double>(sched_.now()) / 1000.0;
                             if (t <= script_->duration_s) gateway_.on_motion(imu_->sample(t));
                           }
                           const auto* p = reinterpret_cast<const std::uint8_t*>(d.payload.data());
                           gateway_.on_frame(std::span<const std::uint8_t>(p, d.payload.size()));
                         });
    poll_ = [this] {
      gateway_.poll();
      sched_.schedule_after(100, [this] { poll_(); });
    };
    sched_.schedule_after(100, [this] { poll_(); });
  }
  driver_.start();
}

void LiveGateway::stop() {
  driver_.stop();
  transport_.close();
}

gateway::GatewayStats LiveGateway::stats() {
  std::lock_guard g(driver_.mutex());
  return gateway_.stats();
}

LiveDevice::LiveDevice(std::string site, WorkerSpec worker, net::MqttClientOptions broker)
    : transport_(std::move(broker), driver_),
      topic_(bus::topics::device_link(site, worker.id)),
      device_(worker.profile, worker.script, worker.id) {}

LiveDevice::~LiveDevice() { stop(); }

void LiveDevice::start() {
  transport_.connect();
  {
    std::lock_guard g(driver_.mutex());
    emit_ = [this] {
      auto e = device_.next();
      if (!e) return;
      transport_.publish(topic_, std::string(e->bytes.begin(), e->bytes.end()), bus::QoS::AtMostOnce, false);
      ++sent_;
      if (!device_.done()) sched_.schedule_at(device_.next_time_ms(), [this] { emit_(); });
    };
    if (!device_.done()) sched_.schedule_at(device_.next_time_ms(), [this] { emit_(); });
  }
  driver_.start();
}

void LiveDevice::stop() {
  driver_.stop();
  transport_.close();
}

bool LiveDevice::done() {
  std::lock_guard g(driver_.mutex());
  return device_.done();
}

std::size_t LiveDevice::sent() {
  std::lock_guard g(driver_.mutex());
  return sent_;
}

}  // namespace swsk::system
