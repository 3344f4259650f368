#include "swsk/telemetry/frame.hpp"

#include <algorithm>

#include "swsk/telemetry/crc16.hpp"

namespace swsk::telemetry {

namespace {

constexpr std::array<FrameFlag, 4> kAllFlags{FrameFlag::ButtonEstop, FrameFlag::SensorFault, FrameFlag::LowBattery,
                                             FrameFlag::AlertLedOn};

void put_u16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v & 0xFF);
  p[1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF);
}

std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::string_view flag_name(FrameFlag f) {
  switch (f) {
    case FrameFlag::ButtonEstop: return "BUTTON_ESTOP";
    case FrameFlag::SensorFault: return "SENSOR_FAULT";
    case FrameFlag::LowBattery: return "LOW_BATTERY";
    case FrameFlag::AlertLedOn: return "ALERT_LED_ON";
  }
  return "UNKNOWN";
}

std::vector<std::string> FrameFlags::names() const {
  std::vector<std::string> out;
  for (FrameFlag f : kAllFlags) {
    if (test(f)) out.emplace_back(flag_name(f));
  }
  return out;
}

std::optional<FrameFlags> FrameFlags::from_names(std::span<const std::string> names) {
  FrameFlags flags;
  for (const auto& name : names) {
    auto it = std::find_if(kAllFlags.begin(), kAllFlags.end(), [&](FrameFlag f) { return flag_name(f) == name; });
    if (it == kAllFlags.end()) return std::nullopt;
    flags.set(*it);
  }
  return flags;
}

std::optional<std::string> frame_violation(const DeviceFrame& f) {
  if (f.hr != 0 && (f.hr < 25 || f.hr > 250)) return "hr out of range: " + std::to_string(f.hr);
  if (f.spo2 != 0 && (f.spo2 < 70 || f.spo2 > 100)) return "spo2 out of range: " + std::to_string(f.spo2);
  if (f.body_temp != kInvalidU16 && (f.body_temp < 3000 || f.body_temp > 4300)) {
    return "body_temp out of range: " + std::to_string(f.body_temp);
  }
  if (f.humidity > 100) return "humidity out of range: " + std::to_string(f.humidity);
  if (f.battery > 100) return "battery out of range: " + std::to_string(f.battery);
  return std::nullopt;
}

FrameBytes encode_frame(const DeviceFrame& f) {
  if (auto why = frame_violation(f)) throw EncodingError(*why);

  FrameBytes b{};
  b[0] = kFrameMagic;
  b[1] = kFrameVersion;
  put_u16(&b[2], f.seq);
  put_u32(&b[4], f.t_ms);
  b[8] = f.flags.bits();
  b[9] = f.hr;
  b[10] = f.spo2;
  put_u16(&b[11], f.body_temp);
  put_u16(&b[13], f.gsr);
  put_u16(&b[15], static_cast<std::uint16_t>(f.amb_temp));
  b[17] = f.humidity;
  put_u16(&b[18], f.light);
  put_u16(&b[20], f.co2);
  put_u16(&b[22], f.voc);
  b[24] = f.sound;
  b[25] = f.battery;
  put_u16(&b[26], crc16_ccitt_false(std::span<const std::uint8_t>(b.data(), 26)));
  return b;
}

std::string_view to_string(DecodeError e) {
  switch (e) {
    case DecodeError::ShortFrame: return "ShortFrame";
    case DecodeError::BadMagic: return "BadMagic";
    case DecodeError::BadVersion: return "BadVersion";
    case DecodeError::CrcMismatch: return "CrcMismatch";
    case DecodeError::FieldOutOfRange: return "FieldOutOfRange";
  }
  return "Unknown";
}

DecodeResult decode_frame(std::span<const std::uint8_t> b) {
  if (b.size() != kFrameSize) return DecodeError::ShortFrame;
  if (b[0] != kFrameMagic) return DecodeError::BadMagic;
  if (b[1] != kFrameVersion) return DecodeError::BadVersion;
  if (crc16_ccitt_false(b.first(26)) != get_u16(&b[26])) return DecodeError::CrcMismatch;
  if ((b[8] & ~kKnownFlagBits) != 0) return DecodeError::FieldOutOfRange;

  DeviceFrame f;
  f.seq = get_u16(&b[2]);
  f.t_ms = get_u32(&b[4]);
  f.flags = FrameFlags(b[8]);
  f.hr = b[9];
  f.spo2 = b[10];
  f.body_temp = get_u16(&b[11]);
  f.gsr = get_u16(&b[13]);
  f.amb_temp = static_cast<std::int16_t>(get_u16(&b[15]));
  f.humidity = b[17];
  f.light = get_u16(&b[18]);
  f.co2 = get_u16(&b[20]);
  f.voc = get_u16(&b[22]);
  f.sound = b[24];
  f.battery = b[25];
  if (frame_violation(f)) return DecodeError::FieldOutOfRange;
  return f;
}

}  // namespace swsk::telemetry
