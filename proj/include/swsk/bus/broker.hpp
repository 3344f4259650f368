#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swsk/bus/link_fault.hpp"
#include "swsk/bus/topic.hpp"
#include "swsk/core/random.hpp"
#include "swsk/core/time.hpp"
#include "swsk/sim/scheduler.hpp"

namespace swsk::bus {

enum class QoS : std::uint8_t { AtMostOnce = 0, AtLeastOnce = 1 };

struct Message {
  std::string topic;
  std::string payload;  // opaque bytes
  QoS qos = QoS::AtMostOnce;
  bool retain = false;
  VirtualMs publish_ts = 0;  // stamped by the broker on publish
};

struct Delivery {
  std::string topic;
  std::string payload;
  QoS qos = QoS::AtMostOnce;
  bool retained = false;   // replayed from the retained store on subscribe
  bool duplicate = false;  // a redelivered copy of an already delivered message
  VirtualMs publish_ts = 0;
  std::string publisher;
};

using Handler = std::function<void(const Delivery&)>;

enum class ClockMode : std::uint8_t { Simulation, WallClock };

struct BrokerConfig {
  std::size_t max_payload = 64 * 1024;
  VirtualMs redelivery_ms = 250;
  int max_retries = 20;
  std::uint64_t seed = 0;
  ClockMode mode = ClockMode::Simulation;
  bool record_events = true;  // keep the delivery log (off for long-running live brokers)
};

enum class PublishStatus : std::uint8_t { Accepted, Rejected };

struct BusEvent {
  enum class Kind : std::uint8_t { Deliver, DeadLetter };
  Kind kind = Kind::Deliver;
  VirtualMs ts = 0;
  std::string from;
  std::string to;
  std::string topic;
  std::uint64_t payload_hash = 0;
  bool duplicate = false;

  friend bool operator==(const BusEvent&, const BusEvent&) = default;
};

struct BrokerStats {
  std::uint64_t published = 0;
  std::uint64_t rejected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t transmissions_lost = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t dead_letters = 0;
};

class ModeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// In-process broker with MQTT 3.1.1 delivery semantics (QoS 0/1, retained
// messages, wildcard subscriptions) over simulated client links.
//
// Every message crosses two hops: publisher -> broker and broker ->
// subscriber, each subject to the client's LinkFault. QoS 1 hops are acked
// over the reverse direction and retransmitted every redelivery_ms until
// acked; after max_retries the message is dead-lettered. Receivers release
// QoS 1 messages in sequence order per link, so per-(publisher, topic) order
// holds even when jitter or loss reorders the wire.
//
// Not thread-safe; one logical owner drives it through the scheduler.
class Broker {
 public:
  using ClientId = std::uint32_t;
  using SubscriptionId = std::uint64_t;

  explicit Broker(sim::Scheduler& scheduler, BrokerConfig config = {});

  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  ClientId connect(std::string name, LinkFault fault = {});
  void set_link_fault(ClientId client, LinkFault fault);
  const LinkFault& link_fault(ClientId client) const;
  const std::string& client_name(ClientId client) const;

  /// True when the client's link is outside every partition window right now.
  bool link_up(ClientId client) const;

  PublishStatus publish(ClientId client, Message msg);

  /// Throws InvalidFilter. Retained messages matching the filter are sent to
  /// this subscription immediately (over the client's link).
  SubscriptionId subscribe(ClientId client, std::string_view filter, QoS max_qos, Handler handler);
  void unsubscribe(ClientId client, SubscriptionId id);

  /// Simulation mode only: runs the scheduler forward by dt and returns the
  /// bus events (deliveries, dead letters) that happened meanwhile.
  std::vector<BusEvent> advance_clock(VirtualMs dt);

  const std::vector<BusEvent>& event_log() const { return log_; }
  /// SHA-256 over the canonical text of the event log.
  std::string event_log_digest() const;

  std::optional<Message> retained(std::string_view topic) const;
  const BrokerStats& stats() const { return stats_; }
  VirtualMs now() const { return scheduler_.now(); }
  sim::Scheduler& scheduler() { return scheduler_; }

 private:
  struct Subscription {
    SubscriptionId id;
    TopicFilter filter;
    QoS max_qos;
    Handler handler;
  };

  enum class Direction : std::uint8_t { Up, Down };

  // A message on one hop.
  struct Transmission {
    Direction dir = Direction::Up;
    ClientId client = 0;  // publisher (Up) or subscriber (Down)
    Message msg;
    std::string publisher;
    std::optional<SubscriptionId> only_subscription;
    bool from_retained = false;
    bool duplicate = false;  // carries a duplicate from the previous hop
    std::uint64_t seq = 0;
    int attempts = 0;
    bool acked = false;
  };

  // One direction of a link: sender sequence numbers plus the receiver's
  // reorder buffer. A nullopt entry marks a dead-lettered gap.
  struct Stream {
    std::uint64_t next_send_seq = 0;
    std::uint64_t next_release_seq = 0;
    std::map<std::uint64_t, std::optional<Transmission>> held;
    VirtualMs last_qos0_arrival = 0;
  };

  struct Client {
    std::string name;
    LinkFault fault;
    std::vector<Subscription> subscriptions;
    Stream uplink;    // client -> broker
    Stream downlink;  // broker -> client
  };

  Client& client(ClientId id);
  const Client& client(ClientId id) const;

  VirtualMs draw_latency(const LinkFault& fault);
  bool lost_on_wire(const LinkFault& fault, std::string_view topic);

  Stream& stream_of(Direction dir, ClientId id);
  void send(Transmission t);
  void attempt(std::uint64_t key);
  void check_ack(std::uint64_t key);
  void arrive(std::uint64_t key, Transmission t);
  void drain(Stream& stream);
  void release(const Transmission& t, bool duplicate);
  void route(const Message& msg, const std::string& publisher, bool duplicate);
  void deliver(const Transmission& t, bool duplicate);

  sim::Scheduler& scheduler_;
  BrokerConfig config_;
  Rng rng_;
  std::vector<Client> clients_;
  std::map<std::string, Message> retained_;
  std::map<std::uint64_t, Transmission> inflight_;
  std::uint64_t next_transmission_ = 0;
  SubscriptionId next_subscription_ = 1;
  std::vector<BusEvent> log_;
  BrokerStats stats_;
};

}  // namespace swsk::bus
