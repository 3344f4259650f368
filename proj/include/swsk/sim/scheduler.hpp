#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "swsk/core/time.hpp"

namespace swsk::sim {

// Discrete-event scheduler over a virtual millisecond clock. Actions due at
// the same instant run in scheduling order, which makes every run with the
// same inputs replay identically.
class Scheduler {
 public:
  using Action = std::function<void()>;

  VirtualMs now() const { return now_; }

  void schedule_at(VirtualMs at, Action action);
  void schedule_after(VirtualMs delay, Action action) { schedule_at(now_ + delay, std::move(action)); }

  /// Runs every action due at or before `until`, then sets the clock to `until`.
  /// Returns the number of actions executed.
  std::size_t run_until(VirtualMs until);

  std::size_t pending() const { return queue_.size(); }

 private:
  struct Entry {
    VirtualMs at;
    std::uint64_t order;
    Action action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.at != b.at ? a.at > b.at : a.order > b.order;
    }
  };

  VirtualMs now_ = 0;
  std::uint64_t next_order_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
};

}  // namespace swsk::sim
