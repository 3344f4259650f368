#include <gtest/gtest.h>

#include "swsk/net/mqtt_codec.hpp"

namespace swsk::net::mqtt {
namespace {

Packet round_trip(const Packet& p) {
  Decoder d;
  const auto bytes = encode(p);
  d.feed(bytes.data(), bytes.size());
  auto out = d.next();
  EXPECT_TRUE(out.has_value());
  EXPECT_FALSE(d.next().has_value());
  return *out;
}

TEST(MqttCodec, EveryPacketRoundTrips) {
  std::vector<Packet> packets = {
      Connect{"machine:m1", 10, true},
      Connack{false, 0},
      Connack{true, 5},
      Publish{"plant/machine/m1/cmd", "{\"type\":\"ESTOP\"}", 1, false, true, 42},
      Publish{"plant/machine/m1/state", "", 0, true, false, 0},
      Puback{7},
      Subscribe{3, {{"plant/machine/+/state", 1}, {"plant/#", 0}}},
      Suback{3, {1, 0x80}},
      Pingreq{},
      Pingresp{},
      Disconnect{},
  };
  for (const auto& p : packets) EXPECT_EQ(round_trip(p), p) << "variant " << p.index();
}

TEST(MqttCodec, RemainingLengthBoundaries) {
  for (std::size_t n : {0u, 100u, 121u, 122u, 16000u, 16378u, 16379u, 70000u}) {
    Publish p{"t", std::string(n, 'x'), 0, false, false, 0};
    EXPECT_EQ(round_trip(p), Packet(p)) << n;
  }
}

TEST(MqttCodec, DecodesAcrossArbitrarySplits) {
  std::string stream;
  for (int i = 0; i < 20; ++i) {
    stream += encode(Publish{"a/b", std::string(static_cast<std::size_t>(i * 13), 'p'), 1, false, false,
                             static_cast<std::uint16_t>(i + 1)});
  }
  Decoder d;
  int got = 0;
  for (char c : stream) {
    d.feed(&c, 1);
    while (auto p = d.next()) {
      ++got;
      EXPECT_EQ(std::get<Publish>(*p).packet_id, got);
    }
  }
  EXPECT_EQ(got, 20);
}

void expect_rejected(const std::string& bytes) {
  Decoder d(1024);
  d.feed(bytes.data(), bytes.size());
  EXPECT_THROW(d.next(), ProtocolError);
}

TEST(MqttCodec, RejectsMalformedInput) {
  expect_rejected(std::string("\x30\xff\xff\xff\xff\x01", 6));  // remaining length 5 bytes
  expect_rejected(std::string("\x36\x05\x00\x01t\x00\x01", 7));  // QoS 3
  expect_rejected(std::string("\x80\x05\x00\x01\x00\x01t", 7));  // SUBSCRIBE flags 0
  expect_rejected(std::string("\x82\x02\x00\x01", 4));           // no filters
  expect_rejected(std::string("\x30\x03\x00\x09t", 5));          // topic runs past body
  expect_rejected(std::string("\xf0\x00", 2));                   // reserved type 15
  expect_rejected(std::string("\x30\x80\x10", 3));               // 2048 > max_packet
}

TEST(MqttCodec, RejectsForeignConnect) {
  auto bytes = encode(Connect{"x", 10, true});
  bytes[4] = 'Q';  // protocol name
  expect_rejected(bytes);
  bytes = encode(Connect{"x", 10, true});
  bytes[8] = 3;  // protocol level
  expect_rejected(bytes);
}

TEST(MqttCodec, WaitsForIncompletePacket) {
  const auto bytes = encode(Publish{"a", "payload", 0, false, false, 0});
  Decoder d;
  d.feed(bytes.data(), bytes.size() - 1);
  EXPECT_FALSE(d.next().has_value());
  d.feed(bytes.data() + bytes.size() - 1, 1);
  EXPECT_TRUE(d.next().has_value());
}

TEST(MqttCodec, RefusesOversizedTopicOnEncode) {
  EXPECT_THROW(encode(Publish{std::string(70000, 't'), "", 0, false, false, 0}), ProtocolError);
}

}  // namespace
}  // namespace swsk::net::mqtt
