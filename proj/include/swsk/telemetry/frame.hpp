#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace swsk::telemetry {

enum class FrameFlag : std::uint8_t {
  ButtonEstop = 1u << 0,
  SensorFault = 1u << 1,
  LowBattery = 1u << 2,
  AlertLedOn = 1u << 3,
};

inline constexpr std::uint8_t kKnownFlagBits = 0x0F;

class FrameFlags {
 public:
  constexpr FrameFlags() = default;
  constexpr explicit FrameFlags(std::uint8_t bits) : bits_(bits & kKnownFlagBits) {}

  constexpr bool test(FrameFlag f) const { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
  constexpr void set(FrameFlag f, bool on = true) {
    if (on) {
      bits_ = static_cast<std::uint8_t>(bits_ | static_cast<std::uint8_t>(f));
    } else {
      bits_ = static_cast<std::uint8_t>(bits_ & ~static_cast<std::uint8_t>(f));
    }
  }
  constexpr std::uint8_t bits() const { return bits_; }

  /// Names in bit order, e.g. {"BUTTON_ESTOP", "ALERT_LED_ON"}.
  std::vector<std::string> names() const;
  /// Inverse of names(); nullopt on an unknown name.
  static std::optional<FrameFlags> from_names(std::span<const std::string> names);

  friend constexpr bool operator==(FrameFlags, FrameFlags) = default;

 private:
  std::uint8_t bits_ = 0;
};

std::string_view flag_name(FrameFlag f);

inline constexpr std::uint16_t kInvalidU16 = 0xFFFF;

// One wearable sample in wire units. hr/spo2 use 0 as "invalid";
// body_temp/gsr use 0xFFFF.
struct DeviceFrame {
  std::uint16_t seq = 0;
  std::uint32_t t_ms = 0;
  FrameFlags flags;
  std::uint8_t hr = 0;                     // beats/min
  std::uint8_t spo2 = 0;                   // percent
  std::uint16_t body_temp = kInvalidU16;   // centi-degC
  std::uint16_t gsr = kInvalidU16;         // skin conductance, 0.01 uS
  std::int16_t amb_temp = 0;               // centi-degC
  std::uint8_t humidity = 0;               // %RH
  std::uint16_t light = 0;                 // lux
  std::uint16_t co2 = 0;                   // ppm
  std::uint16_t voc = 0;                   // ppb
  std::uint8_t sound = 0;                  // dB
  std::uint8_t battery = 0;                // percent

  bool hr_valid() const { return hr != 0; }
  bool spo2_valid() const { return spo2 != 0; }
  bool body_temp_valid() const { return body_temp != kInvalidU16; }
  bool gsr_valid() const { return gsr != kInvalidU16; }

  friend bool operator==(const DeviceFrame&, const DeviceFrame&) = default;
};

/// Describes the first violated field invariant, or nullopt when the frame is valid.
std::optional<std::string> frame_violation(const DeviceFrame& f);

// Wire layout, little-endian:
//   [0] magic  [1] version  [2..3] seq  [4..7] t_ms  [8] flags  [9] hr
//   [10] spo2  [11..12] body_temp  [13..14] gsr  [15..16] amb_temp (signed)
//   [17] humidity  [18..19] light  [20..21] co2  [22..23] voc  [24] sound
//   [25] battery  [26..27] CRC-16/CCITT-FALSE over bytes 0..25
inline constexpr std::size_t kFrameSize = 28;
inline constexpr std::uint8_t kFrameMagic = 0xA5;
inline constexpr std::uint8_t kFrameVersion = 0x01;

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

class EncodingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws EncodingError when the frame violates a field invariant.
FrameBytes encode_frame(const DeviceFrame& frame);

enum class DecodeError : std::uint8_t {
  ShortFrame,  // any length other than kFrameSize
  BadMagic,
  BadVersion,
  CrcMismatch,
  FieldOutOfRange,
};

std::string_view to_string(DecodeError e);

using DecodeResult = std::variant<DeviceFrame, DecodeError>;

DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

}  // namespace swsk::telemetry
