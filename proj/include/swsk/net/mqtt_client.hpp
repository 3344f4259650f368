#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>

#include "swsk/bus/transport.hpp"
#include "swsk/net/realtime.hpp"

namespace swsk::net {

class ConnectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MqttClientOptions {
  std::string host = "127.0.0.1";
  int port = 1883;
  std::string client_id;
  std::uint16_t keep_alive_s = 10;
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds reconnect_delay{500};
};

// bus::Transport over a TCP connection to an MQTT 3.1.1 broker (the
// embedded bridge or any external one). Reconnects on its own; after a
// reconnect it resubscribes and resends unacknowledged QoS 1 publishes with
// the DUP flag. Handlers run on the driver thread.
class MqttTransport final : public bus::Transport {
 public:
  MqttTransport(MqttClientOptions options, RealtimeDriver& driver);
  ~MqttTransport() override;
  MqttTransport(const MqttTransport&) = delete;
  MqttTransport& operator=(const MqttTransport&) = delete;

  /// Blocks until the broker accepts the session. Throws ConnectError.
  void connect();
  void close();

  bus::PublishStatus publish(const std::string& topic, std::string payload, bus::QoS qos, bool retain) override;
  void subscribe(const std::string& filter, bus::QoS qos, bus::Handler handler) override;
  bool link_up() const override;

  std::uint64_t reconnects() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace swsk::net
