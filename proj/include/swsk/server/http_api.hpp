#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "swsk/server/server.hpp"

namespace httplib {
class Server;
}

namespace swsk::server {

// Fan-out of formatted server-sent events to any number of stream clients.
class EventHub {
 public:
  struct Client {
    std::deque<std::string> queue;
    bool closed = false;
  };

  std::shared_ptr<Client> subscribe();
  void unsubscribe(const std::shared_ptr<Client>& c);
  void publish(const std::string& frame);
  /// Blocks up to `wait` for data; empty optional once the hub is closed.
  std::optional<std::string> next(const std::shared_ptr<Client>& c, std::chrono::milliseconds wait);
  void close();
  std::size_t clients() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::shared_ptr<Client>> clients_;
  bool closed_ = false;
  static constexpr std::size_t kMaxQueued = 4096;
};

/// Which events go to the stream: ALERT, ASSESSMENT, STATE_CHANGE,
/// NOTIFICATION always; TELEMETRY at most once per step_s per worker.
class StreamFilter {
 public:
  explicit StreamFilter(VirtualMs telemetry_every_ms) : every_(telemetry_every_ms) {}
  bool pass(const EventRecord& e);

 private:
  VirtualMs every_;
  std::map<std::string, VirtualMs> last_;
};

std::string sse_frame(const EventRecord& e);

// JSON API over a SafetyServer. Handlers run on HTTP threads and take
// `lock` (the same mutex the driver thread holds while running the server).
class HttpApi {
 public:
  HttpApi(SafetyServer& server, std::mutex& lock);
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws on failure.
  int bind(const std::string& host, int port);
  /// Serves on a background thread.
  void start();
  void stop();
  std::size_t stream_clients() const { return hub_.clients(); }

 private:
  void routes();

  SafetyServer& server_;
  std::mutex& lock_;
  std::unique_ptr<httplib::Server> http_;
  EventHub hub_;
  StreamFilter filter_;
  std::thread thread_;
};

}  // namespace swsk::server
