#include "swsk/bus/broker.hpp"

#include <algorithm>
#include <sstream>

#include "swsk/core/hash.hpp"

namespace swsk::bus {

namespace {
QoS min_qos(QoS a, QoS b) { return static_cast<QoS>(std::min(static_cast<int>(a), static_cast<int>(b))); }
}  // namespace

Broker::Broker(sim::Scheduler& scheduler, BrokerConfig config)
    : scheduler_(scheduler), config_(config), rng_(config.seed) {}

Broker::ClientId Broker::connect(std::string name, LinkFault fault) {
  fault.validate();
  clients_.push_back(Client{std::move(name), std::move(fault), {}, {}, {}});
  return static_cast<ClientId>(clients_.size() - 1);
}

Broker::Client& Broker::client(ClientId id) {
  if (id >= clients_.size()) throw std::out_of_range("unknown bus client");
  return clients_[id];
}

const Broker::Client& Broker::client(ClientId id) const {
  if (id >= clients_.size()) throw std::out_of_range("unknown bus client");
  return clients_[id];
}

Broker::Stream& Broker::stream_of(Direction dir, ClientId id) {
  return dir == Direction::Up ? client(id).uplink : client(id).downlink;
}

void Broker::set_link_fault(ClientId id, LinkFault fault) {
  fault.validate();
  client(id).fault = std::move(fault);
}

const LinkFault& Broker::link_fault(ClientId id) const { return client(id).fault; }
const std::string& Broker::client_name(ClientId id) const { return client(id).name; }

bool Broker::link_up(ClientId id) const { return !client(id).fault.partitioned_at(scheduler_.now()); }

PublishStatus Broker::publish(ClientId id, Message msg) {
  if (!is_valid_topic(msg.topic) || msg.payload.size() > config_.max_payload) {
    ++stats_.rejected;
    return PublishStatus::Rejected;
  }
  msg.publish_ts = scheduler_.now();
  ++stats_.published;
  Transmission t;
  t.dir = Direction::Up;
  t.client = id;
  t.msg = std::move(msg);
  t.publisher = client(id).name;
  send(std::move(t));
  return PublishStatus::Accepted;
}

Broker::SubscriptionId Broker::subscribe(ClientId id, std::string_view filter_text, QoS max_qos, Handler handler) {
  auto filter = TopicFilter::parse(filter_text);
  const SubscriptionId sub_id = next_subscription_++;
  client(id).subscriptions.push_back(Subscription{sub_id, filter, max_qos, std::move(handler)});
  for (const auto& [topic, msg] : retained_) {
    if (!filter.matches(topic)) continue;
    Transmission t;
    t.dir = Direction::Down;
    t.client = id;
    t.msg = msg;
    t.msg.qos = min_qos(msg.qos, max_qos);
    t.publisher = "broker";
    t.only_subscription = sub_id;
    t.from_retained = true;
    send(std::move(t));
  }
  return sub_id;
}

void Broker::unsubscribe(ClientId id, SubscriptionId sub_id) {
  auto& subs = client(id).subscriptions;
  subs.erase(std::remove_if(subs.begin(), subs.end(), [&](const Subscription& s) { return s.id == sub_id; }),
             subs.end());
}

std::vector<BusEvent> Broker::advance_clock(VirtualMs dt) {
  if (config_.mode != ClockMode::Simulation) throw ModeError("advance_clock is only available in simulation mode");
  const auto before = log_.size();
  scheduler_.run_until(scheduler_.now() + std::max<VirtualMs>(dt, 0));
  return {log_.begin() + static_cast<std::ptrdiff_t>(before), log_.end()};
}

std::string Broker::event_log_digest() const {
  std::ostringstream out;
  for (const auto& e : log_) {
    out << (e.kind == BusEvent::Kind::Deliver ? 'D' : 'X') << '|' << e.ts << '|' << e.from << '|' << e.to << '|'
        << e.topic << '|' << e.payload_hash << '|' << e.duplicate << '\n';
  }
  return sha256_hex(out.str());
}

std::optional<Message> Broker::retained(std::string_view topic) const {
  auto it = retained_.find(std::string(topic));
  if (it == retained_.end()) return std::nullopt;
  return it->second;
}

VirtualMs Broker::draw_latency(const LinkFault& fault) {
  VirtualMs extra = 0;
  if (fault.jitter_ms > 0) {
    extra = static_cast<VirtualMs>(rng_.uniform() * static_cast<double>(fault.jitter_ms + 1));
    extra = std::min(extra, fault.jitter_ms);
  }
  return fault.latency_ms + extra;
}

bool Broker::lost_on_wire(const LinkFault& fault, std::string_view topic) {
  if (fault.partitioned_at(scheduler_.now())) return true;
  return rng_.bernoulli(fault.drop_prob_for(topic));
}

void Broker::send(Transmission t) {
  if (t.msg.qos == QoS::AtLeastOnce) t.seq = stream_of(t.dir, t.client).next_send_seq++;
  const auto key = next_transmission_++;
  inflight_.emplace(key, std::move(t));
  attempt(key);
}

void Broker::attempt(std::uint64_t key) {
  auto it = inflight_.find(key);
  if (it == inflight_.end()) return;
  Transmission& t = it->second;
  ++t.attempts;
  if (t.attempts > 1) ++stats_.retransmissions;
  const bool qos1 = t.msg.qos == QoS::AtLeastOnce;

  const auto& fault = client(t.client).fault;
  if (lost_on_wire(fault, t.msg.topic)) {
    ++stats_.transmissions_lost;
  } else {
    VirtualMs arrival = scheduler_.now() + draw_latency(fault);
    if (!qos1) {
      auto& stream = stream_of(t.dir, t.client);
      arrival = std::max(arrival, stream.last_qos0_arrival);
      stream.last_qos0_arrival = arrival;
    }
    scheduler_.schedule_at(arrival, [this, key, copy = t] { arrive(key, copy); });
  }

  if (qos1) {
    scheduler_.schedule_after(config_.redelivery_ms, [this, key] { check_ack(key); });
  } else {
    inflight_.erase(it);
  }
}

void Broker::check_ack(std::uint64_t key) {
  auto it = inflight_.find(key);
  if (it == inflight_.end()) return;
  const Transmission& t = it->second;
  if (t.attempts <= config_.max_retries) {
    attempt(key);
    return;
  }
  ++stats_.dead_letters;
  if (config_.record_events) log_.push_back(BusEvent{BusEvent::Kind::DeadLetter, scheduler_.now(), t.publisher,
                          t.dir == Direction::Up ? std::string("broker") : client(t.client).name, t.msg.topic,
                          fnv1a64(t.msg.payload), false});
  // The receiver skips the gap instead of holding later messages forever.
  auto& stream = stream_of(t.dir, t.client);
  if (t.seq >= stream.next_release_seq) stream.held.try_emplace(t.seq, std::nullopt);
  inflight_.erase(it);
  drain(stream);
}

void Broker::arrive(std::uint64_t key, Transmission t) {
  if (t.msg.qos == QoS::AtMostOnce) {
    release(t, false);
    return;
  }

  // Ack over the reverse direction; a lost ack causes a redelivered duplicate.
  const auto& fault = client(t.client).fault;
  if (!lost_on_wire(fault, t.msg.topic)) {
    scheduler_.schedule_after(draw_latency(fault), [this, key] { inflight_.erase(key); });
  } else {
    ++stats_.transmissions_lost;
  }

  auto& stream = stream_of(t.dir, t.client);
  if (t.seq < stream.next_release_seq) {
    release(t, true);
    return;
  }
  stream.held.try_emplace(t.seq, std::move(t));
  drain(stream);
}

void Broker::drain(Stream& stream) {
  while (!stream.held.empty() && stream.held.begin()->first == stream.next_release_seq) {
    auto node = stream.held.extract(stream.held.begin());
    ++stream.next_release_seq;
    if (node.mapped()) release(*node.mapped(), false);
  }
}

void Broker::release(const Transmission& t, bool duplicate) {
  duplicate = duplicate || t.duplicate;
  if (t.dir == Direction::Up) {
    route(t.msg, t.publisher, duplicate);
  } else {
    deliver(t, duplicate);
  }
}

void Broker::route(const Message& msg, const std::string& publisher, bool duplicate) {
  if (msg.retain) {
    if (msg.payload.empty()) {
      retained_.erase(msg.topic);
    } else {
      retained_[msg.topic] = msg;
    }
  }
  for (ClientId id = 0; id < clients_.size(); ++id) {
    std::optional<QoS> qos;
    for (const auto& sub : clients_[id].subscriptions) {
      if (!sub.filter.matches(msg.topic)) continue;
      const QoS q = min_qos(msg.qos, sub.max_qos);
      qos = qos ? std::max(*qos, q) : q;
    }
    if (!qos) continue;
    Transmission t;
    t.dir = Direction::Down;
    t.client = id;
    t.msg = msg;
    t.msg.qos = *qos;
    t.publisher = publisher;
    t.duplicate = duplicate;
    send(std::move(t));
  }
}

void Broker::deliver(const Transmission& t, bool duplicate) {
  // Copy the matching handlers first: a handler may (un)subscribe.
  std::vector<Handler> targets;
  for (const auto& sub : client(t.client).subscriptions) {
    if (t.only_subscription && sub.id != *t.only_subscription) continue;
    if (sub.filter.matches(t.msg.topic)) targets.push_back(sub.handler);
  }
  if (targets.empty()) return;

  ++stats_.delivered;
  if (duplicate) ++stats_.duplicates;
  if (config_.record_events) log_.push_back(BusEvent{BusEvent::Kind::Deliver, scheduler_.now(), t.publisher, client(t.client).name, t.msg.topic,
                          fnv1a64(t.msg.payload), duplicate});

  const Delivery d{t.msg.topic, t.msg.payload, t.msg.qos, t.from_retained, duplicate, t.msg.publish_ts, t.publisher};
  for (const auto& handler : targets) handler(d);
}

}  // namespace swsk::bus
