#include "swsk/server/event_log.hpp"

#include <sstream>

#include "swsk/core/errors.hpp"

namespace swsk::server {

namespace fs = std::filesystem;

EventLog::EventLog(EventLogOptions options) : options_(std::move(options)) {
  if (options_.dir) {
    fs::create_directories(*options_.dir);
    out_.open(*options_.dir / kEventLogFile, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!out_) throw std::runtime_error("cannot open event log in " + options_.dir->string());
    fs::remove(*options_.dir / kSnapshotFile);
  }
}

std::optional<fs::path> EventLog::path() const {
  if (!options_.dir) return std::nullopt;
  return *options_.dir / kEventLogFile;
}

const EventRecord& EventLog::append(VirtualMs ts, EventKind kind, nlohmann::json payload) {
  EventRecord e{next_seq_, ts, kind, std::move(payload)};
  state_.apply(e);
  ++next_seq_;
  const std::string line = to_json(e).dump() + "\n";
  hasher_.update(line);
  if (out_.is_open()) out_ << line;
  if (options_.snapshot_every > 0 && e.event_seq % options_.snapshot_every == 0) write_snapshot();
  if (options_.keep_records) {
    records_.push_back(std::move(e));
    return records_.back();
  }
  last_ = std::move(e);
  return last_;
}

void EventLog::flush() {
  if (out_.is_open()) out_.flush();
}

void EventLog::write_snapshot() {
  if (!options_.dir) return;
  flush();
  const nlohmann::json snap = {{"event_seq", last_seq()}, {"state_hash", state_hash(state_)}, {"state", to_json(state_)}};
  const auto tmp = *options_.dir / (std::string(kSnapshotFile) + ".tmp");
  {
    std::ofstream f(tmp, std::ios::out | std::ios::trunc);
    f << snap.dump() << "\n";
  }
  fs::rename(tmp, *options_.dir / kSnapshotFile);
}

namespace {

ReplayResult replay_lines(std::istream& in, ServerState start, std::uint64_t skip_through) {
  ReplayResult res;
  res.state = std::move(start);
  res.last_seq = skip_through;
  Sha256 hasher;

  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  std::uint64_t expected = 1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool final_line = i + 1 == lines.size();
    EventRecord e;
    try {
      e = event_from_json(nlohmann::json::parse(lines[i]));
    } catch (const std::exception& ex) {
      if (final_line) {
        res.truncated_tail = true;
        res.tail_error = ex.what();
        break;
      }
      throw ReplayError(expected, std::string("unreadable record: ") + ex.what());
    }
    if (e.event_seq != expected) {
      throw ReplayError(expected, "expected event_seq " + std::to_string(expected) + ", found " + std::to_string(e.event_seq));
    }
    ++expected;
    hasher.update(lines[i] + "\n");
    if (e.event_seq <= skip_through) continue;
    try {
      res.state.apply(e);
    } catch (const std::exception& ex) {
      throw ReplayError(e.event_seq, std::string("does not apply: ") + ex.what());
    }
    res.last_seq = e.event_seq;
    ++res.replayed;
  }
  res.log_digest = hasher.hex();
  return res;
}

}  // namespace

ReplayResult replay(std::istream& in) { return replay_lines(in, ServerState{}, 0); }

ReplayResult replay_file(const fs::path& path, bool use_snapshot) {
  const fs::path log = fs::is_directory(path) ? path / kEventLogFile : path;
  std::ifstream in(log, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read event log " + log.string());

  const fs::path snap_path = log.parent_path() / kSnapshotFile;
  if (use_snapshot && fs::exists(snap_path)) {
    std::ifstream sf(snap_path);
    const auto snap = nlohmann::json::parse(sf);
    const auto seq = snap.at("event_seq").get<std::uint64_t>();
    auto state = state_from_json(snap.at("state"));
    if (state_hash(state) != snap.at("state_hash").get<std::string>()) {
      throw ReplayError(seq, "snapshot hash mismatch");
    }
    auto res = replay_lines(in, std::move(state), seq);
    res.snapshot_seq = seq;
    return res;
  }
  return replay_lines(in, ServerState{}, 0);
}

}  // namespace swsk::server
