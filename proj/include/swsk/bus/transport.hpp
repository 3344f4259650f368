#pragma once

#include <string>

#include "swsk/bus/broker.hpp"

namespace swsk::bus {

// What a node (gateway, server, machine controller) sees of the pub/sub
// layer. Implemented over the in-process broker and over a remote MQTT
// connection.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual PublishStatus publish(const std::string& topic, std::string payload, QoS qos, bool retain) = 0;
  /// Throws InvalidFilter.
  virtual void subscribe(const std::string& filter, QoS qos, Handler handler) = 0;
  virtual bool link_up() const = 0;
};

class BusTransport final : public Transport {
 public:
  BusTransport(Broker& broker, Broker::ClientId client) : broker_(broker), client_(client) {}

  PublishStatus publish(const std::string& topic, std::string payload, QoS qos, bool retain) override {
    return broker_.publish(client_, Message{topic, std::move(payload), qos, retain, 0});
  }
  void subscribe(const std::string& filter, QoS qos, Handler handler) override {
    broker_.subscribe(client_, filter, qos, std::move(handler));
  }
  bool link_up() const override { return broker_.link_up(client_); }

  Broker::ClientId client_id() const { return client_; }

 private:
  Broker& broker_;
  Broker::ClientId client_;
};

}  // namespace swsk::bus
