#include "swsk/net/mqtt_bridge.hpp"

#include <boost/asio.hpp>

#include <deque>
#include <iostream>
#include <set>

#include "swsk/net/mqtt_codec.hpp"

namespace swsk::net {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, bus::Broker& broker, RealtimeDriver& driver, std::function<void(Session*)> on_close)
      : socket_(std::move(socket)), broker_(broker), driver_(driver), on_close_(std::move(on_close)) {}

  void start() { read(); }

  void close() {
    if (closed_) return;
    closed_ = true;
    boost::system::error_code ignored;
    socket_.close(ignored);
    // Broker side cleanup happens on the driver thread, after any work this session already posted.
    driver_.post([self = shared_from_this()] {
      if (!self->client_) return;
      for (auto id : self->subs_) self->broker_.unsubscribe(*self->client_, id);
      self->subs_.clear();
    });
    on_close_(this);
  }

 private:
  void read() {
    auto self = shared_from_this();
    socket_.async_read_some(asio::buffer(buf_), [self](boost::system::error_code ec, std::size_t n) {
      if (ec) {
        self->close();
        return;
      }
      try {
        self->decoder_.feed(self->buf_.data(), n);
        while (auto p = self->decoder_.next()) {
          if (!self->handle(*p)) {
            self->close();
            return;
          }
        }
      } catch (const mqtt::ProtocolError& e) {
        std::cerr << "mqtt: dropping session: " << e.what() << "\n";
        self->close();
        return;
      }
      self->read();
    });
  }

  // False ends the session.
  bool handle(const mqtt::Packet& p) {
    auto self = shared_from_this();
    if (const auto* c = std::get_if<mqtt::Connect>(&p)) {
      if (connected_) return false;
      connected_ = true;
      const auto name = "mqtt:" + (c->client_id.empty() ? std::string("anon") : c->client_id);
      driver_.post([self, name] { self->client_ = self->broker_.connect(name, {}); });
      write(mqtt::encode(mqtt::Connack{false, 0}));
      return true;
    }
    if (!connected_) return false;
    if (const auto* pub = std::get_if<mqtt::Publish>(&p)) {
      bus::Message m{pub->topic, pub->payload, pub->qos == 1 ? bus::QoS::AtLeastOnce : bus::QoS::AtMostOnce, pub->retain, 0};
      driver_.post([self, m = std::move(m)]() mutable { self->broker_.publish(*self->client_, std::move(m)); });
      if (pub->qos == 1) write(mqtt::encode(mqtt::Puback{pub->packet_id}));
    } else if (const auto* sub = std::get_if<mqtt::Subscribe>(&p)) {
      // SUBACK goes out from the driver thread once the subscriptions exist,
      // so retained messages cannot overtake it in a way clients would notice.
      driver_.post([self, s = *sub] {
        mqtt::Suback ack{s.packet_id, {}};
        for (const auto& [filter, qos] : s.filters) {
          try {
            const auto q = qos >= 1 ? bus::QoS::AtLeastOnce : bus::QoS::AtMostOnce;
            std::weak_ptr<Session> weak = self;
            const auto id = self->broker_.subscribe(*self->client_, filter, q, [weak](const bus::Delivery& d) {
              if (auto s = weak.lock()) s->deliver(d);
            });
            self->subs_.push_back(id);
            ack.codes.push_back(static_cast<std::uint8_t>(qos >= 1 ? 1 : 0));
          } catch (const std::exception&) {
            ack.codes.push_back(0x80);
          }
        }
        self->post_write(mqtt::encode(ack));
      });
    } else if (std::holds_alternative<mqtt::Pingreq>(p)) {
      write(mqtt::encode(mqtt::Pingresp{}));
    } else if (std::holds_alternative<mqtt::Disconnect>(p)) {
      return false;
    }
    // PUBACKs for our QoS 1 deliveries need no action: the TCP stream is the
    // retransmission layer and sessions are clean.
    return true;
  }

  // Driver thread.
  void deliver(const bus::Delivery& d) {
    mqtt::Publish p{d.topic, d.payload, static_cast<std::uint8_t>(d.qos == bus::QoS::AtLeastOnce ? 1 : 0), d.retained,
                    d.duplicate, 0};
    if (p.qos == 1) {
      if (out_id_ == 0) out_id_ = 1;
      p.packet_id = out_id_++;
    }
    post_write(mqtt::encode(p));
  }

  void post_write(std::string bytes) {
    asio::post(socket_.get_executor(), [self = shared_from_this(), b = std::move(bytes)]() mutable { self->write(std::move(b)); });
  }

  void write(std::string bytes) {
    if (closed_) return;
    wq_.push_back(std::move(bytes));
    if (wq_.size() == 1) pump();
  }

  void pump() {
    auto self = shared_from_this();
    asio::async_write(socket_, asio::buffer(wq_.front()), [self](boost::system::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      self->wq_.pop_front();
      if (!self->wq_.empty()) self->pump();
    });
  }

  tcp::socket socket_;
  bus::Broker& broker_;
  RealtimeDriver& driver_;
  std::function<void(Session*)> on_close_;
  mqtt::Decoder decoder_;
  std::array<char, 4096> buf_{};
  std::deque<std::string> wq_;
  bool connected_ = false;
  bool closed_ = false;
  // driver thread
  std::optional<bus::Broker::ClientId> client_;
  std::vector<bus::Broker::SubscriptionId> subs_;
  std::uint16_t out_id_ = 1;
};

}  // namespace

struct MqttBridge::Impl : std::enable_shared_from_this<Impl> {
  bus::Broker& broker;
  RealtimeDriver& driver;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::thread thread;
  std::set<std::shared_ptr<Session>> sessions;  // io thread
  std::atomic<std::size_t> count{0};

  Impl(bus::Broker& b, RealtimeDriver& d) : broker(b), driver(d) {}

  void accept() {
    auto self = shared_from_this();
    acceptor.async_accept([self](boost::system::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      socket.set_option(tcp::no_delay(true));
      auto s = std::make_shared<Session>(std::move(socket), self->broker, self->driver, [self](Session* gone) {
        for (auto it = self->sessions.begin(); it != self->sessions.end(); ++it) {
          if (it->get() == gone) {
            self->sessions.erase(it);
            break;
          }
        }
        self->count = self->sessions.size();
      });
      self->sessions.insert(s);
      self->count = self->sessions.size();
      s->start();
      self->accept();
    });
  }
};

MqttBridge::MqttBridge(bus::Broker& broker, RealtimeDriver& driver) : impl_(std::make_shared<Impl>(broker, driver)) {}

MqttBridge::~MqttBridge() { stop(); }

int MqttBridge::listen(const std::string& host, int port) {
  try {
    tcp::endpoint ep(asio::ip::make_address(host), static_cast<unsigned short>(port));
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
    return impl_->acceptor.local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    throw std::runtime_error("cannot listen for MQTT on " + host + ":" + std::to_string(port) + ": " + e.what());
  }
}

void MqttBridge::start() {
  impl_->accept();
  impl_->thread = std::thread([impl = impl_] { impl->io.run(); });
}

void MqttBridge::stop() {
  if (!impl_->thread.joinable()) return;
  asio::post(impl_->io, [impl = impl_] {
    boost::system::error_code ignored;
    impl->acceptor.close(ignored);
    auto all = impl->sessions;
    for (const auto& s : all) s->close();
  });
  asio::post(impl_->io, [impl = impl_] { impl->io.stop(); });
  impl_->thread.join();
}

std::size_t MqttBridge::sessions() const { return impl_->count; }

}  // namespace swsk::net
