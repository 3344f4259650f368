#include "swsk/net/mqtt_codec.hpp"

namespace swsk::net::mqtt {

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xFF));
}

void put_str(std::string& out, const std::string& s) {
  if (s.size() > 0xFFFF) throw ProtocolError("string longer than 65535 bytes");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out += s;
}

std::string frame(std::uint8_t first, const std::string& body) {
  if (body.size() > kMaxRemainingLength) throw ProtocolError("packet too large");
  std::string out(1, static_cast<char>(first));
  std::size_t len = body.size();
  do {
    auto byte = static_cast<std::uint8_t>(len % 128);
    len /= 128;
    if (len > 0) byte |= 0x80;
    out.push_back(static_cast<char>(byte));
  } while (len > 0);
  return out + body;
}

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(s_[pos_++]);
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>((static_cast<std::uint8_t>(s_[pos_]) << 8) | static_cast<std::uint8_t>(s_[pos_ + 1]));
    pos_ += 2;
    return v;
  }
  std::string str() {
    const auto n = u16();
    need(n);
    std::string out(s_.substr(pos_, n));
    pos_ += n;
    return out;
  }
  std::string rest() {
    std::string out(s_.substr(pos_));
    pos_ = s_.size();
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw ProtocolError("truncated packet body");
  }
  std::string_view s_;
  std::size_t pos_ = 0;
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string encode(const Packet& p) {
  return std::visit(
      overloaded{
          [](const Connect& c) {
            std::string b;
            put_str(b, "MQTT");
            b.push_back(4);  // protocol level 3.1.1
            b.push_back(static_cast<char>(c.clean_session ? 0x02 : 0x00));
            put_u16(b, c.keep_alive_s);
            put_str(b, c.client_id);
            return frame(0x10, b);
          },
          [](const Connack& c) {
            std::string b;
            b.push_back(static_cast<char>(c.session_present ? 1 : 0));
            b.push_back(static_cast<char>(c.return_code));
            return frame(0x20, b);
          },
          [](const Publish& p) {
            if (p.qos > 1) throw ProtocolError("QoS 2 not supported");
            std::string b;
            put_str(b, p.topic);
            if (p.qos > 0) put_u16(b, p.packet_id);
            b += p.payload;
            const auto first = static_cast<std::uint8_t>(0x30 | (p.dup ? 0x08 : 0) | (p.qos << 1) | (p.retain ? 1 : 0));
            return frame(first, b);
          },
          [](const Puback& a) {
            std::string b;
            put_u16(b, a.packet_id);
            return frame(0x40, b);
          },
          [](const Subscribe& s) {
            if (s.filters.empty()) throw ProtocolError("SUBSCRIBE needs at least one filter");
            std::string b;
            put_u16(b, s.packet_id);
            for (const auto& [f, q] : s.filters) {
              put_str(b, f);
              b.push_back(static_cast<char>(q));
            }
            return frame(0x82, b);
          },
          [](const Suback& s) {
            std::string b;
            put_u16(b, s.packet_id);
            for (auto c : s.codes) b.push_back(static_cast<char>(c));
            return frame(0x90, b);
          },
          [](const Pingreq&) { return frame(0xC0, ""); },
          [](const Pingresp&) { return frame(0xD0, ""); },
          [](const Disconnect&) { return frame(0xE0, ""); },
      },
      p);
}

std::optional<Packet> Decoder::next() {
  if (buf_.size() < 2) return std::nullopt;
  std::size_t len = 0;
  std::size_t mult = 1;
  std::size_t i = 1;
  for (;; ++i) {
    if (i > 4) throw ProtocolError("remaining length longer than 4 bytes");
    if (i >= buf_.size()) return std::nullopt;
    const auto byte = static_cast<std::uint8_t>(buf_[i]);
    len += (byte & 0x7F) * mult;
    mult *= 128;
    if ((byte & 0x80) == 0) break;
  }
  if (len > max_packet_) throw ProtocolError("packet exceeds " + std::to_string(max_packet_) + " bytes");
  const std::size_t header = i + 1;
  if (buf_.size() < header + len) return std::nullopt;

  const auto first = static_cast<std::uint8_t>(buf_[0]);
  Reader r(std::string_view(buf_).substr(header, len));
  const auto type = first >> 4;
  const auto flags = first & 0x0F;
  Packet out;
  switch (type) {
    case 1: {
      if (r.str() != "MQTT") throw ProtocolError("unsupported protocol name");
      if (r.u8() != 4) throw ProtocolError("unsupported protocol level");
      const auto cflags = r.u8();
      if ((cflags & 0x01) != 0) throw ProtocolError("reserved CONNECT flag set");
      Connect c;
      c.clean_session = (cflags & 0x02) != 0;
      c.keep_alive_s = r.u16();
      c.client_id = r.str();
      // Will, username and password are not part of the subset; skip them.
      out = c;
      break;
    }
    case 2: {
      Connack c;
      c.session_present = (r.u8() & 1) != 0;
      c.return_code = r.u8();
      out = c;
      break;
    }
    case 3: {
      Publish p;
      p.dup = (flags & 0x08) != 0;
      p.qos = static_cast<std::uint8_t>((flags >> 1) & 0x03);
      p.retain = (flags & 0x01) != 0;
      if (p.qos > 1) throw ProtocolError("QoS 2 not supported");
      p.topic = r.str();
      if (p.qos > 0) p.packet_id = r.u16();
      p.payload = r.rest();
      out = p;
      break;
    }
    case 4:
      out = Puback{r.u16()};
      break;
    case 8: {
      if (flags != 0x2) throw ProtocolError("bad SUBSCRIBE flags");
      Subscribe s;
      s.packet_id = r.u16();
      while (!r.done()) {
        auto f = r.str();
        s.filters.emplace_back(std::move(f), r.u8());
      }
      if (s.filters.empty()) throw ProtocolError("SUBSCRIBE without filters");
      out = s;
      break;
    }
    case 9: {
      Suback s;
      s.packet_id = r.u16();
      while (!r.done()) s.codes.push_back(r.u8());
      out = s;
      break;
    }
    case 12:
      out = Pingreq{};
      break;
    case 13:
      out = Pingresp{};
      break;
    case 14:
      out = Disconnect{};
      break;
    default:
      throw ProtocolError("unsupported packet type " + std::to_string(type));
  }
  buf_.erase(0, header + len);
  return out;
}

}  // namespace swsk::net::mqtt
