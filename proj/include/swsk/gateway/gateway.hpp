#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "swsk/bus/transport.hpp"
#include "swsk/core/time.hpp"
#include "swsk/telemetry/telemetry.hpp"

namespace swsk::gateway {

struct BackoffConfig {
  VirtualMs initial_ms = 100;
  double factor = 2.0;
  VirtualMs cap_ms = 5000;
};

struct GatewayConfig {
  std::string worker_id;
  std::string site_id;
  std::size_t buffer_capacity = 8192;
  std::size_t dedup_window = 64;
  BackoffConfig backoff;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct GatewayStats {
  std::uint64_t frames_ok = 0;
  std::uint64_t frames_crc_fail = 0;     // CrcMismatch and ShortFrame
  std::uint64_t frames_invalid = 0;      // BadMagic, BadVersion, FieldOutOfRange
  std::uint64_t frames_dropped_dup = 0;
  std::uint64_t motion_rejected = 0;
  std::uint64_t msgs_published = 0;
  std::uint64_t msgs_buffered = 0;       // total ever placed in the buffer
  std::uint64_t msgs_dropped_overflow = 0;
};

// 100, 200, 400, ... capped delays between reconnect attempts.
class ReconnectBackoff {
 public:
  explicit ReconnectBackoff(BackoffConfig config = {}) : config_(config) {}
  VirtualMs next_delay();
  void reset() { attempts_ = 0; }

 private:
  BackoffConfig config_;
  int attempts_ = 0;
};

// Phone-side relay for one worker. All inputs must come from one thread.
class Gateway {
 public:
  using Clock = std::function<VirtualMs()>;

  Gateway(GatewayConfig config, bus::Transport& transport, Clock clock);

  /// Telemetry built from the frame (published or buffered), or nullopt
  /// when the frame was rejected or a duplicate.
  std::optional<telemetry::WorkerTelemetry> on_frame(std::span<const std::uint8_t> bytes);

  /// Magnitude is recomputed from the components. False when rejected.
  bool on_motion(const telemetry::MotionSample& sample);

  void on_disconnect();
  /// Flushes the buffer in order, then resumes direct publishing.
  void on_reconnect();
  /// Notices link loss, and retries the link when the backoff allows.
  void poll();

  bool connected() const { return connected_; }
  std::size_t buffered() const { return buffer_.size(); }
  std::optional<VirtualMs> next_reconnect_attempt() const;
  const GatewayStats& stats() const { return stats_; }
  const GatewayConfig& config() const { return config_; }
  const std::optional<telemetry::MotionSample>& latest_motion() const { return motion_; }
  const std::string& topic() const { return topic_; }

 private:
  bool is_duplicate(std::uint16_t seq);
  void send(const telemetry::WorkerTelemetry& t);
  void enqueue(telemetry::WorkerTelemetry t);

  GatewayConfig config_;
  bus::Transport& transport_;
  Clock clock_;
  std::string topic_;
  bool connected_ = true;
  ReconnectBackoff backoff_;
  VirtualMs next_attempt_ = 0;
  std::deque<std::uint16_t> recent_seqs_;
  std::deque<telemetry::WorkerTelemetry> buffer_;
  std::optional<telemetry::MotionSample> motion_;
  std::uint64_t next_gateway_seq_ = 0;
  GatewayStats stats_;
};

}  // namespace swsk::gateway
