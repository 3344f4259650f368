#include "swsk/gateway/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "swsk/bus/topic.hpp"

namespace swsk::gateway {

using telemetry::DecodeError;

void GatewayConfig::validate() const {
  if (worker_id.empty() || worker_id.find_first_of("/+#") != std::string::npos) {
    throw std::invalid_argument("gateway: invalid worker_id '" + worker_id + "'");
  }
  if (site_id.empty() || site_id.find_first_of("/+#") != std::string::npos) {
    throw std::invalid_argument("gateway: invalid site_id '" + site_id + "'");
  }
  if (buffer_capacity < 1) throw std::invalid_argument("gateway: buffer_capacity must be >= 1");
  if (dedup_window < 1) throw std::invalid_argument("gateway: dedup_window must be >= 1");
  if (backoff.initial_ms <= 0 || backoff.factor < 1.0 || backoff.cap_ms < backoff.initial_ms) {
    throw std::invalid_argument("gateway: backoff needs initial > 0, factor >= 1, cap >= initial");
  }
}

VirtualMs ReconnectBackoff::next_delay() {
  const double d = static_cast<double>(config_.initial_ms) * std::pow(config_.factor, attempts_);
  ++attempts_;
  return std::min(config_.cap_ms, static_cast<VirtualMs>(std::min(d, 1e15)));
}

Gateway::Gateway(GatewayConfig config, bus::Transport& transport, Clock clock)
    : config_(std::move(config)), transport_(transport), clock_(std::move(clock)), backoff_(config_.backoff) {
  config_.validate();
  topic_ = bus::topics::telemetry(config_.site_id, config_.worker_id);
}

bool Gateway::is_duplicate(std::uint16_t seq) {
  if (std::find(recent_seqs_.begin(), recent_seqs_.end(), seq) != recent_seqs_.end()) return true;
  recent_seqs_.push_back(seq);
  if (recent_seqs_.size() > config_.dedup_window) recent_seqs_.pop_front();
  return false;
}

std::optional<telemetry::WorkerTelemetry> Gateway::on_frame(std::span<const std::uint8_t> bytes) {
  auto decoded = telemetry::decode_frame(bytes);
  if (const auto* err = std::get_if<DecodeError>(&decoded)) {
    if (*err == DecodeError::CrcMismatch || *err == DecodeError::ShortFrame) {
      ++stats_.frames_crc_fail;
    } else {
      ++stats_.frames_invalid;
    }
    return std::nullopt;
  }
  const auto& frame = std::get<telemetry::DeviceFrame>(decoded);
  if (is_duplicate(frame.seq)) {
    ++stats_.frames_dropped_dup;
    return std::nullopt;
  }
  ++stats_.frames_ok;

  telemetry::WorkerTelemetry t;
  t.worker_id = config_.worker_id;
  t.site_id = config_.site_id;
  t.recv_ts = clock_();
  t.gateway_seq = next_gateway_seq_++;
  t.frame = telemetry::to_physical(frame);
  t.motion = motion_;

  if (connected_ && !transport_.link_up()) on_disconnect();
  if (connected_) {
    send(t);
  } else {
    enqueue(t);
  }
  return t;
}

bool Gateway::on_motion(const telemetry::MotionSample& sample) {
  auto checked = telemetry::MotionSample::make(sample.ax, sample.ay, sample.az, sample.sampled_at);
  if (!checked) {
    ++stats_.motion_rejected;
    return false;
  }
  motion_ = *checked;
  return true;
}

void Gateway::send(const telemetry::WorkerTelemetry& t) {
  transport_.publish(topic_, telemetry::to_json(t).dump(), bus::QoS::AtLeastOnce, false);
  ++stats_.msgs_published;
}

void Gateway::enqueue(telemetry::WorkerTelemetry t) {
  if (buffer_.size() >= config_.buffer_capacity) {
    buffer_.pop_front();
    ++stats_.msgs_dropped_overflow;
  }
  buffer_.push_back(std::move(t));
  ++stats_.msgs_buffered;
}

void Gateway::on_disconnect() {
  if (!connected_) return;
  connected_ = false;
  backoff_.reset();
  next_attempt_ = clock_() + backoff_.next_delay();
}

void Gateway::on_reconnect() {
  connected_ = true;
  backoff_.reset();
  while (!buffer_.empty()) {
    send(buffer_.front());
    buffer_.pop_front();
  }
}

void Gateway::poll() {
  if (connected_) {
    if (!transport_.link_up()) on_disconnect();
    return;
  }
  const VirtualMs now = clock_();
  if (now < next_attempt_) return;
  if (transport_.link_up()) {
    on_reconnect();
  } else {
    next_attempt_ = now + backoff_.next_delay();
  }
}

std::optional<VirtualMs> Gateway::next_reconnect_attempt() const {
  if (connected_) return std::nullopt;
  return next_attempt_;
}

}  // namespace swsk::gateway
