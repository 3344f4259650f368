#include "swsk/sim/scheduler.hpp"

#include <algorithm>

namespace swsk::sim {

void Scheduler::schedule_at(VirtualMs at, Action action) {
  queue_.push(Entry{std::max(at, now_), next_order_++, std::move(action)});
}

std::size_t Scheduler::run_until(VirtualMs until) {
  std::size_t ran = 0;
  while (!queue_.empty() && queue_.top().at <= until) {
    // Copy out before pop: the action may schedule more work.
    Entry e = queue_.top();
    queue_.pop();
    now_ = e.at;
    e.action();
    ++ran;
  }
  now_ = std::max(now_, until);
  return ran;
}

}  // namespace swsk::sim
