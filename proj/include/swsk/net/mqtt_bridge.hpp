#pragma once

#include <memory>
#include <string>

#include "swsk/bus/broker.hpp"
#include "swsk/net/realtime.hpp"

namespace swsk::net {

// Exposes an in-process Broker to other processes as an MQTT 3.1.1 endpoint.
// Each TCP session becomes a broker client named "mqtt:<client_id>" with a
// fault-free link. All broker calls go through the driver thread.
class MqttBridge {
 public:
  MqttBridge(bus::Broker& broker, RealtimeDriver& driver);
  ~MqttBridge();
  MqttBridge(const MqttBridge&) = delete;
  MqttBridge& operator=(const MqttBridge&) = delete;

  /// Port 0 picks a free port. Returns the bound port. Throws std::runtime_error.
  int listen(const std::string& host, int port);
  void start();
  void stop();
  std::size_t sessions() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace swsk::net
