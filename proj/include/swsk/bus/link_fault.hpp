#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swsk/bus/topic.hpp"
#include "swsk/core/time.hpp"

namespace swsk::bus {

/// Half-open interval [start, end) during which the link carries nothing.
struct Partition {
  VirtualMs start = 0;
  VirtualMs end = 0;
};

/// Overrides the link-wide drop probability for topics matching `filter`.
struct TopicDrop {
  std::string filter;
  double drop_prob = 0.0;
};

// Fault model of one client <-> broker link. Both directions share it.
struct LinkFault {
  VirtualMs latency_ms = 0;  // fixed part
  VirtualMs jitter_ms = 0;   // uniform extra delay in [0, jitter_ms]
  double drop_prob = 0.0;
  std::vector<TopicDrop> topic_drops;
  std::vector<Partition> partitions;

  /// Throws std::invalid_argument on out-of-range probabilities, negative
  /// delays, or overlapping partitions.
  void validate() const;

  bool partitioned_at(VirtualMs t) const;
  double drop_prob_for(std::string_view topic) const;
  VirtualMs max_latency() const { return latency_ms + jitter_ms; }
};

}  // namespace swsk::bus
