#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace swsk::net::mqtt {

// The MQTT 3.1.1 subset the system uses: clean sessions, QoS 0/1, retain,
// no will, no username/password, no QoS 2.

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Connect {
  std::string client_id;
  std::uint16_t keep_alive_s = 30;
  bool clean_session = true;
  friend bool operator==(const Connect&, const Connect&) = default;
};
struct Connack {
  bool session_present = false;
  std::uint8_t return_code = 0;
  friend bool operator==(const Connack&, const Connack&) = default;
};
struct Publish {
  std::string topic;
  std::string payload;
  std::uint8_t qos = 0;
  bool retain = false;
  bool dup = false;
  std::uint16_t packet_id = 0;  // QoS 1 only
  friend bool operator==(const Publish&, const Publish&) = default;
};
struct Puback {
  std::uint16_t packet_id = 0;
  friend bool operator==(const Puback&, const Puback&) = default;
};
struct Subscribe {
  std::uint16_t packet_id = 0;
  std::vector<std::pair<std::string, std::uint8_t>> filters;
  friend bool operator==(const Subscribe&, const Subscribe&) = default;
};
struct Suback {
  std::uint16_t packet_id = 0;
  std::vector<std::uint8_t> codes;  // granted QoS, 0x80 on failure
  friend bool operator==(const Suback&, const Suback&) = default;
};
struct Pingreq {
  friend bool operator==(const Pingreq&, const Pingreq&) = default;
};
struct Pingresp {
  friend bool operator==(const Pingresp&, const Pingresp&) = default;
};
struct Disconnect {
  friend bool operator==(const Disconnect&, const Disconnect&) = default;
};

using Packet = std::variant<Connect, Connack, Publish, Puback, Subscribe, Suback, Pingreq, Pingresp, Disconnect>;

inline constexpr std::size_t kMaxRemainingLength = 268435455;

std::string encode(const Packet& p);

// Incremental decoder over a byte stream.
class Decoder {
 public:
  explicit Decoder(std::size_t max_packet = 1 << 20) : max_packet_(max_packet) {}
  void feed(const char* data, std::size_t n) { buf_.append(data, n); }
  /// Next complete packet, if any. Throws ProtocolError on malformed input.
  std::optional<Packet> next();

 private:
  std::string buf_;
  std::size_t max_packet_;
};

}  // namespace swsk::net::mqtt
