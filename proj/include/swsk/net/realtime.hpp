#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "swsk/sim/scheduler.hpp"

namespace swsk::net {

// Drives a Scheduler from the wall clock on its own thread, so the same
// nodes that run in simulation run live. Scheduler time is milliseconds
// since start(). Everything touching the scheduler or the nodes it drives
// must run on that thread: use post(), or hold mutex().
class RealtimeDriver {
 public:
  explicit RealtimeDriver(sim::Scheduler& scheduler, std::chrono::milliseconds tick = std::chrono::milliseconds(2));
  ~RealtimeDriver();
  RealtimeDriver(const RealtimeDriver&) = delete;
  RealtimeDriver& operator=(const RealtimeDriver&) = delete;

  /// Thread-safe. Runs `fn` on the driver thread, in posting order.
  void post(std::function<void()> fn);
  std::mutex& mutex() { return mu_; }

  void start();
  void stop();
  bool running() const { return running_; }
  /// Wall-clock scheduler time; callable from any thread.
  VirtualMs now() const;

 private:
  void loop();

  sim::Scheduler& scheduler_;
  std::chrono::milliseconds tick_;
  std::mutex mu_;
  std::mutex post_mu_;
  std::condition_variable cv_;
  std::vector<std::function<void()>> posted_;
  std::atomic<bool> running_{false};
  std::thread thread_;
  std::chrono::steady_clock::time_point t0_;
  VirtualMs base_ = 0;
};

}  // namespace swsk::net
