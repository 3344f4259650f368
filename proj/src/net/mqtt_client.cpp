#include "swsk/net/mqtt_client.hpp"

#include <boost/asio.hpp>

#include <deque>
#include <future>
#include <map>

#include "swsk/bus/topic.hpp"
#include "swsk/net/mqtt_codec.hpp"

namespace swsk::net {

namespace asio = boost::asio;
using asio::ip::tcp;

struct MqttTransport::Impl : std::enable_shared_from_this<Impl> {
  MqttClientOptions opt;
  RealtimeDriver& driver;
  asio::io_context io;
  asio::executor_work_guard<asio::io_context::executor_type> work{io.get_executor()};
  tcp::socket socket{io};
  tcp::resolver resolver{io};
  asio::steady_timer retry{io};
  asio::steady_timer ping{io};
  std::thread thread;

  // io thread only
  mqtt::Decoder decoder;
  std::array<char, 4096> rbuf{};
  std::deque<std::string> wqueue;
  bool writing = false;
  std::uint16_t next_id = 1;
  std::map<std::uint16_t, mqtt::Publish> unacked;
  std::vector<std::pair<std::string, std::uint8_t>> filters;
  std::vector<std::pair<bus::TopicFilter, bus::Handler>> handlers;
  bool closing = false;
  std::uint64_t generation = 0;
  std::optional<std::promise<void>> first;

  std::atomic<bool> up{false};
  std::atomic<std::uint64_t> reconnects{0};

  Impl(MqttClientOptions o, RealtimeDriver& d) : opt(std::move(o)), driver(d) {}

  void write(std::string bytes) {
    wqueue.push_back(std::move(bytes));
    if (!writing) pump();
  }

  void pump() {
    if (wqueue.empty() || !up) {
      writing = false;
      return;
    }
    writing = true;
    auto self = shared_from_this();
    const auto gen = generation;
    asio::async_write(socket, asio::buffer(wqueue.front()), [self, gen](boost::system::error_code ec, std::size_t) {
      if (gen != self->generation) return;
      if (ec) {
        self->fail();
        return;
      }
      self->wqueue.pop_front();
      self->pump();
    });
  }

  void start_connect() {
    auto self = shared_from_this();
    resolver.async_resolve(opt.host, std::to_string(opt.port), [self](auto ec, tcp::resolver::results_type results) {
      if (ec) {
        self->fail();
        return;
      }
      asio::async_connect(self->socket, results, [self](auto ec2, const tcp::endpoint&) {
        if (ec2) {
          self->fail();
          return;
        }
        self->socket.set_option(tcp::no_delay(true));
        const auto gen = ++self->generation;
        self->decoder = mqtt::Decoder{};
        auto hello = std::make_shared<std::string>(
            mqtt::encode(mqtt::Connect{self->opt.client_id, self->opt.keep_alive_s, true}));
        asio::async_write(self->socket, asio::buffer(*hello), [self, hello, gen](auto ec3, std::size_t) {
          if (ec3 || gen != self->generation) {
            self->fail();
            return;
          }
          self->read(gen);
        });
      });
    });
  }

  void read(std::uint64_t gen) {
    auto self = shared_from_this();
    socket.async_read_some(asio::buffer(rbuf), [self, gen](boost::system::error_code ec, std::size_t n) {
      if (gen != self->generation) return;
      if (ec) {
        self->fail();
        return;
      }
      try {
        self->decoder.feed(self->rbuf.data(), n);
        while (auto p = self->decoder.next()) self->handle(*p);
      } catch (const mqtt::ProtocolError&) {
        self->fail();
        return;
      }
      self->read(gen);
    });
  }

  void handle(const mqtt::Packet& p) {
    if (const auto* ack = std::get_if<mqtt::Connack>(&p)) {
      if (ack->return_code != 0) {
        fail();
        return;
      }
      up = true;
      if (first) {
        first->set_value();
        first.reset();
      } else {
        ++reconnects;
      }
      if (!filters.empty()) write(mqtt::encode(mqtt::Subscribe{next_packet_id(), filters}));
      for (auto& [id, pub] : unacked) {
        pub.dup = true;
        write(mqtt::encode(pub));
      }
      schedule_ping();
      if (!writing) pump();
    } else if (const auto* pub = std::get_if<mqtt::Publish>(&p)) {
      if (pub->qos == 1) write(mqtt::encode(mqtt::Puback{pub->packet_id}));
      bus::Delivery d;
      d.topic = pub->topic;
      d.payload = pub->payload;
      d.qos = pub->qos == 1 ? bus::QoS::AtLeastOnce : bus::QoS::AtMostOnce;
      d.retained = pub->retain;
      d.duplicate = pub->dup;
      for (const auto& [f, h] : handlers) {
        if (f.matches(d.topic)) driver.post([h = h, d] { h(d); });
      }
    } else if (const auto* pa = std::get_if<mqtt::Puback>(&p)) {
      unacked.erase(pa->packet_id);
    }
  }

  std::uint16_t next_packet_id() {
    if (next_id == 0) next_id = 1;
    return next_id++;
  }

  void schedule_ping() {
    auto self = shared_from_this();
    const auto gen = generation;
    ping.expires_after(std::chrono::seconds(std::max<int>(1, opt.keep_alive_s / 2)));
    ping.async_wait([self, gen](boost::system::error_code ec) {
      if (ec || gen != self->generation || !self->up) return;
      self->write(mqtt::encode(mqtt::Pingreq{}));
      self->schedule_ping();
    });
  }

  void fail() {
    ++generation;
    up = false;
    writing = false;
    wqueue.clear();
    boost::system::error_code ignored;
    socket.close(ignored);
    ping.cancel();
    if (first) {
      // The initial attempt reports through connect(), which sees up == false.
      first->set_value();
      first.reset();
      return;
    }
    if (closing) return;
    auto self = shared_from_this();
    retry.expires_after(opt.reconnect_delay);
    retry.async_wait([self](boost::system::error_code ec) {
      if (!ec && !self->closing) self->start_connect();
    });
  }
};

MqttTransport::MqttTransport(MqttClientOptions options, RealtimeDriver& driver)
    : impl_(std::make_shared<Impl>(std::move(options), driver)) {
  impl_->thread = std::thread([impl = impl_] { impl->io.run(); });
}

MqttTransport::~MqttTransport() { close(); }

void MqttTransport::connect() {
  std::promise<void> done;
  auto fut = done.get_future();
  asio::post(impl_->io, [impl = impl_, d = std::move(done)]() mutable {
    impl->first.emplace(std::move(d));
    impl->start_connect();
  });
  if (fut.wait_for(impl_->opt.connect_timeout) != std::future_status::ready || !impl_->up) {
    // Drop the pending first attempt so a late CONNACK is not mistaken for success.
    std::promise<void> sync;
    auto synced = sync.get_future();
    asio::post(impl_->io, [impl = impl_, &sync] {
      impl->first.reset();
      impl->closing = true;
      ++impl->generation;
      boost::system::error_code ignored;
      impl->socket.close(ignored);
      sync.set_value();
    });
    synced.wait();
    throw ConnectError("cannot reach MQTT broker at " + impl_->opt.host + ":" + std::to_string(impl_->opt.port));
  }
}

void MqttTransport::close() {
  if (!impl_ || !impl_->thread.joinable()) return;
  asio::post(impl_->io, [impl = impl_] {
    impl->closing = true;
    if (impl->up) {
      // Best effort goodbye; the socket closes right after.
      boost::system::error_code ignored;
      const auto bye = mqtt::encode(mqtt::Disconnect{});
      asio::write(impl->socket, asio::buffer(bye), ignored);
    }
    impl->up = false;
    ++impl->generation;
    boost::system::error_code ignored;
    impl->socket.close(ignored);
    impl->retry.cancel();
    impl->ping.cancel();
    impl->work.reset();
  });
  impl_->thread.join();
}

bus::PublishStatus MqttTransport::publish(const std::string& topic, std::string payload, bus::QoS qos, bool retain) {
  if (!bus::is_valid_topic(topic)) return bus::PublishStatus::Rejected;
  asio::post(impl_->io, [impl = impl_, topic, payload = std::move(payload), qos, retain]() mutable {
    mqtt::Publish p{topic, std::move(payload), static_cast<std::uint8_t>(qos == bus::QoS::AtLeastOnce ? 1 : 0), retain,
                    false, 0};
    if (p.qos == 1) {
      p.packet_id = impl->next_packet_id();
      impl->unacked[p.packet_id] = p;
    } else if (!impl->up) {
      return;  // QoS 0 is not kept across outages
    }
    if (impl->up) impl->write(mqtt::encode(p));
  });
  return bus::PublishStatus::Accepted;
}

void MqttTransport::subscribe(const std::string& filter, bus::QoS qos, bus::Handler handler) {
  auto parsed = bus::TopicFilter::parse(filter);
  asio::post(impl_->io, [impl = impl_, parsed, filter, qos, handler = std::move(handler)]() mutable {
    const auto q = static_cast<std::uint8_t>(qos == bus::QoS::AtLeastOnce ? 1 : 0);
    impl->filters.emplace_back(filter, q);
    impl->handlers.emplace_back(std::move(parsed), std::move(handler));
    if (impl->up) impl->write(mqtt::encode(mqtt::Subscribe{impl->next_packet_id(), {{filter, q}}}));
  });
}

bool MqttTransport::link_up() const { return impl_->up; }

std::uint64_t MqttTransport::reconnects() const { return impl_->reconnects; }

}  // namespace swsk::net
