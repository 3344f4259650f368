#pragma once

#include <string>
#include <utility>
#include <vector>

#include "swsk/bus/topic.hpp"
#include "swsk/bus/transport.hpp"

namespace swsk::testsupport {

// Records publishes; subscribers receive publishes synchronously via inject().
class FakeTransport final : public bus::Transport {
 public:
  struct Published {
    std::string topic;
    std::string payload;
    bus::QoS qos;
    bool retain;
  };

  bus::PublishStatus publish(const std::string& topic, std::string payload, bus::QoS qos, bool retain) override {
    published.push_back({topic, std::move(payload), qos, retain});
    return bus::PublishStatus::Accepted;
  }
  void subscribe(const std::string& filter, bus::QoS, bus::Handler handler) override {
    subs.emplace_back(bus::TopicFilter::parse(filter), std::move(handler));
  }
  bool link_up() const override { return up; }

  void inject(const std::string& topic, const std::string& payload, VirtualMs ts = 0) {
    bus::Delivery d;
    d.topic = topic;
    d.payload = payload;
    d.publish_ts = ts;
    for (auto& [f, h] : subs) {
      if (f.matches(topic)) h(d);
    }
  }

  bool up = true;
  std::vector<Published> published;
  std::vector<std::pair<bus::TopicFilter, bus::Handler>> subs;
};

}  // namespace swsk::testsupport
