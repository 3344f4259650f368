#include "swsk/net/realtime.hpp"

#include <iostream>

namespace swsk::net {

RealtimeDriver::RealtimeDriver(sim::Scheduler& scheduler, std::chrono::milliseconds tick)
    : scheduler_(scheduler), tick_(tick) {}

RealtimeDriver::~RealtimeDriver() { stop(); }

void RealtimeDriver::post(std::function<void()> fn) {
  {
    std::lock_guard g(post_mu_);
    posted_.push_back(std::move(fn));
  }
  cv_.notify_one();
}

VirtualMs RealtimeDriver::now() const {
  const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0_);
  return base_ + dt.count();
}

void RealtimeDriver::start() {
  if (running_) return;
  {
    std::lock_guard g(mu_);
    base_ = scheduler_.now();
  }
  t0_ = std::chrono::steady_clock::now();
  running_ = true;
  thread_ = std::thread([this] { loop(); });
}

void RealtimeDriver::stop() {
  if (!running_.exchange(false)) return;
  cv_.notify_one();
  if (thread_.joinable()) thread_.join();
}

void RealtimeDriver::loop() {
  while (running_) {
    std::vector<std::function<void()>> batch;
    {
      std::lock_guard g(post_mu_);
      batch.swap(posted_);
    }
    {
      std::lock_guard g(mu_);
      // Catch the clock up first so posted work sees the current time.
      scheduler_.run_until(now());
      for (auto& fn : batch) {
        try {
          fn();
        } catch (const std::exception& e) {
          std::cerr << "driver: task failed: " << e.what() << "\n";
        }
      }
      scheduler_.run_until(now());
    }
    std::unique_lock g(post_mu_);
    cv_.wait_for(g, tick_, [this] { return !posted_.empty() || !running_; });
  }
}

}  // namespace swsk::net
