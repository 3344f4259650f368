#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swsk/core/hash.hpp"
#include "swsk/server/events.hpp"
#include "swsk/server/state.hpp"

namespace swsk::server {

struct EventLogOptions {
  /// Directory for events.jsonl and snapshot.json; empty keeps the log in memory only.
  std::optional<std::filesystem::path> dir;
  std::uint64_t snapshot_every = 10000;
  bool keep_records = true;
};

// Append-only log that owns the server state: each append applies the event
// to the state and, when backed by a directory, writes one JSONL line.
class EventLog {
 public:
  explicit EventLog(EventLogOptions options = {});

  /// Assigns the next event_seq. Throws (and records nothing) when the event
  /// does not apply to the current state.
  const EventRecord& append(VirtualMs ts, EventKind kind, nlohmann::json payload);

  const ServerState& state() const { return state_; }
  std::uint64_t last_seq() const { return next_seq_ - 1; }
  /// SHA-256 over every line written, newline included.
  std::string digest() const { return hasher_.hex(); }
  const std::vector<EventRecord>& records() const { return records_; }
  std::optional<std::filesystem::path> path() const;
  void flush();

 private:
  void write_snapshot();

  EventLogOptions options_;
  ServerState state_;
  std::uint64_t next_seq_ = 1;
  Sha256 hasher_;
  std::ofstream out_;
  std::vector<EventRecord> records_;
  EventRecord last_;
};

inline constexpr const char* kEventLogFile = "events.jsonl";
inline constexpr const char* kSnapshotFile = "snapshot.json";

class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::uint64_t event_seq, const std::string& what)
      : std::runtime_error("event_seq " + std::to_string(event_seq) + ": " + what), event_seq_(event_seq) {}
  std::uint64_t event_seq() const { return event_seq_; }

 private:
  std::uint64_t event_seq_;
};

struct ReplayResult {
  ServerState state;
  std::uint64_t last_seq = 0;
  std::uint64_t replayed = 0;      // events applied from the log (after any snapshot)
  bool truncated_tail = false;     // final line was unreadable and skipped
  std::string tail_error;
  std::string log_digest;          // over the valid lines, as EventLog::digest
  std::optional<std::uint64_t> snapshot_seq;
};

/// Rebuilds state from genesis. Throws ReplayError for mid-log corruption or a seq gap.
ReplayResult replay(std::istream& in);
/// `path` is events.jsonl or its directory. With use_snapshot, starts from
/// snapshot.json when present and replays only the later events.
ReplayResult replay_file(const std::filesystem::path& path, bool use_snapshot = false);

}  // namespace swsk::server
