#pragma once

#include <cstdint>

namespace swsk {

/// Milliseconds on the simulation (or wall) clock driving a node.
using VirtualMs = std::int64_t;

inline constexpr VirtualMs seconds_to_ms(double s) { return static_cast<VirtualMs>(s * 1000.0 + (s >= 0 ? 0.5 : -0.5)); }
inline constexpr double ms_to_seconds(VirtualMs ms) { return static_cast<double>(ms) / 1000.0; }

}  // namespace swsk
