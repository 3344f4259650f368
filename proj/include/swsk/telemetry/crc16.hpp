#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace swsk::telemetry {

namespace detail {
constexpr std::array<std::uint16_t, 256> make_ccitt_table() {
  std::array<std::uint16_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    std::uint16_t crc = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
    }
    table[i] = crc;
  }
  return table;
}
inline constexpr auto kCcittTable = make_ccitt_table();
}  // namespace detail

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, unreflected, no final xor.
constexpr std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ detail::kCcittTable[((crc >> 8) ^ byte) & 0xFF]);
  }
  return crc;
}

}  // namespace swsk::telemetry
