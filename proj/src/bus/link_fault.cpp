#include "swsk/bus/link_fault.hpp"

#include <algorithm>

namespace swsk::bus {

void LinkFault::validate() const {
  auto check_prob = [](double p, const std::string& what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(what + " must be within [0, 1]");
  };
  if (latency_ms < 0 || jitter_ms < 0) throw std::invalid_argument("latency and jitter must be non-negative");
  check_prob(drop_prob, "drop_prob");
  for (const auto& td : topic_drops) {
    TopicFilter::parse(td.filter);
    check_prob(td.drop_prob, "topic drop_prob");
  }
  auto sorted = partitions;
  std::sort(sorted.begin(), sorted.end(), [](const Partition& a, const Partition& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].end <= sorted[i].start) throw std::invalid_argument("partition must have end > start");
    if (i > 0 && sorted[i].start < sorted[i - 1].end) throw std::invalid_argument("partitions overlap");
  }
}

bool LinkFault::partitioned_at(VirtualMs t) const {
  return std::any_of(partitions.begin(), partitions.end(),
                     [t](const Partition& p) { return t >= p.start && t < p.end; });
}

double LinkFault::drop_prob_for(std::string_view topic) const {
  for (const auto& td : topic_drops) {
    if (TopicFilter::parse(td.filter).matches(topic)) return td.drop_prob;
  }
  return drop_prob;
}

}  // namespace swsk::bus
