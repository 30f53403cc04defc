#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "clawtrace/event.hpp"

namespace clawtrace {

struct IngestReceipt {
  int64_t accepted = 0;
  int64_t duplicates = 0;
  std::vector<std::pair<size_t, std::string>> rejected;  // (index, reason)
  std::string to_json() const;
};

struct SessionLog {
  std::string session_key;
  std::vector<TraceEvent> events;  // seq order
  bool complete = false;           // session_end seen
  std::string to_json() const;
};

// Raised when the request body itself cannot be parsed; carries the byte
// offset reported by the JSON parser.
struct BodyParseError : std::runtime_error {
  BodyParseError(const std::string& msg, size_t byte_offset)
      : std::runtime_error(msg), byte(byte_offset) {}
  size_t byte = 0;
};

// Durable event store: one append-only NDJSON log per session plus a
// (session_key, seq) dedup index rebuilt from the logs at startup.
// Writes are exclusive, reads shared; a receipt is returned only after
// the accepted events are flushed to disk.
class EventStore {
 public:
  explicit EventStore(std::filesystem::path data_dir);

  // Body is a JSON array of event documents or newline-delimited documents.
  // Valid, non-duplicate events are appended durably; duplicates counted;
  // invalid events reported by index without blocking valid siblings.
  IngestReceipt handle_ingest(std::string_view body);

  SessionLog load_session(const std::string& session_key) const;  // NotFound
  std::vector<std::string> session_keys() const;
  size_t event_count() const;

 private:
  void append_batch(const std::map<std::string, std::vector<const TraceEvent*>>&
                        per_session);
  void scan_existing();

  std::filesystem::path sessions_dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::vector<TraceEvent>> sessions_;
  std::map<std::string, std::set<int64_t>> seen_;
};

std::string encode_session_filename(const std::string& key);
std::string decode_session_filename(const std::string& filename);

// HTTP front end: POST /v1/traces/events, GET /v1/sessions/{key},
// GET /v1/healthz.
class IngestService {
 public:
  explicit IngestService(EventStore& store);
  ~IngestService();

  // Binds and serves on a background thread. port 0 picks an ephemeral
  // port; the actual port is returned. Throws ConfigError on bind failure.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop() (for cmd serve).
  bool run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace clawtrace
