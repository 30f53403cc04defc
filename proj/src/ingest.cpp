#include "clawtrace/ingest.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "httplib.h"

#include "clawtrace/errors.hpp"

namespace clawtrace {

namespace fs = std::filesystem;

std::string IngestReceipt::to_json() const {
  nlohmann::ordered_json o;
  o["accepted"] = accepted;
  o["duplicates"] = duplicates;
  o["rejected"] = nlohmann::ordered_json::array();
  for (const auto& [index, reason] : rejected) {
    nlohmann::ordered_json r;
    r["index"] = index;
    r["reason"] = reason;
    o["rejected"].push_back(std::move(r));
  }
  return o.dump();
}

std::string SessionLog::to_json() const {
  nlohmann::ordered_json o;
  o["schema_version"] = "1";
  o["session_key"] = session_key;
  o["complete"] = complete;
  o["events"] = nlohmann::ordered_json::array();
  for (const auto& ev : events) o["events"].push_back(event_to_json(ev));
  return o.dump();
}

std::string encode_session_filename(const std::string& key) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : key) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xf]);
    }
  }
  return out;
}

std::string decode_session_filename(const std::string& filename) {
  auto hex = [](char h) -> int {
    if (h >= '0' && h <= '9') return h - '0';
    if (h >= 'a' && h <= 'f') return h - 'a' + 10;
    if (h >= 'A' && h <= 'F') return h - 'A' + 10;
    return -1;
  };
  std::string out;
  for (size_t i = 0; i < filename.size(); ++i) {
    if (filename[i] == '%' && i + 2 < filename.size() &&
        hex(filename[i + 1]) >= 0 && hex(filename[i + 2]) >= 0) {
      out.push_back(
          static_cast<char>(hex(filename[i + 1]) * 16 + hex(filename[i + 2])));
      i += 2;
    } else {
      out.push_back(filename[i]);
    }
  }
  return out;
}

EventStore::EventStore(fs::path data_dir)
    : sessions_dir_(data_dir / "sessions") {
  std::error_code ec;
  fs::create_directories(sessions_dir_, ec);
  if (ec || !fs::is_directory(sessions_dir_))
    throw ConfigError("cannot create data directory: " +
                      sessions_dir_.string());
  // Probe writability up front so serve fails fast on a read-only dir.
  auto probe = sessions_dir_ / ".probe";
  std::ofstream f(probe);
  if (!f) throw ConfigError("data directory not writable: " +
                            sessions_dir_.string());
  f.close();
  fs::remove(probe, ec);
  scan_existing();
}

void EventStore::scan_existing() {
  for (const auto& entry : fs::directory_iterator(sessions_dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".ndjson")
      continue;
    std::ifstream in(entry.path());
    std::string line;
    std::string key = decode_session_filename(entry.path().stem().string());
    auto& log = sessions_[key];
    auto& seen = seen_[key];
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
      if (doc.is_discarded()) break;  // torn trailing write; acked lines are whole
      auto validated = validate_event(doc);
      auto* ev = std::get_if<TraceEvent>(&validated);
      if (!ev) break;
      if (seen.insert(ev->seq).second) log.push_back(std::move(*ev));
    }
  }
}

namespace {

std::vector<nlohmann::json> parse_body(std::string_view body) {
  // Try an array wrapper first; fall back to line-delimited documents.
  size_t first = body.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw BodyParseError("empty body", 0);
  if (body[first] == '[') {
    try {
      nlohmann::json arr = nlohmann::json::parse(body);
      if (!arr.is_array()) throw BodyParseError("body is not an array", first);
      return {arr.begin(), arr.end()};
    } catch (const nlohmann::json::parse_error& e) {
      throw BodyParseError(e.what(), e.byte);
    }
  }
  std::vector<nlohmann::json> docs;
  size_t pos = 0;
  size_t offset = 0;
  while (pos < body.size()) {
    size_t eol = body.find('\n', pos);
    std::string_view line = body.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos
                                           : eol - pos);
    offset = pos;
    pos = eol == std::string_view::npos ? body.size() : eol + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      docs.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw BodyParseError(e.what(), offset + e.byte);
    }
  }
  if (docs.empty()) throw BodyParseError("no event documents in body", 0);
  return docs;
}

}  // namespace

IngestReceipt EventStore::handle_ingest(std::string_view body) {
  auto docs = parse_body(body);

  IngestReceipt receipt;
  std::vector<TraceEvent> fresh;
  fresh.reserve(docs.size());
  {
    std::unique_lock lock(mu_);
    std::map<std::string, std::set<int64_t>> in_batch;
    for (size_t i = 0; i < docs.size(); ++i) {
      auto validated = validate_event(docs[i]);
      if (auto* err = std::get_if<ValidationError>(&validated)) {
        receipt.rejected.emplace_back(i, err->to_string());
        continue;
      }
      auto& ev = std::get<TraceEvent>(validated);
      bool dup = seen_[ev.session_key].count(ev.seq) ||
                 in_batch[ev.session_key].count(ev.seq);
      if (dup) {
        ++receipt.duplicates;
        continue;
      }
      in_batch[ev.session_key].insert(ev.seq);
      fresh.push_back(std::move(ev));
    }

    std::map<std::string, std::vector<const TraceEvent*>> per_session;
    for (const auto& ev : fresh) per_session[ev.session_key].push_back(&ev);
    append_batch(per_session);  // throws on storage failure, nothing acked

    for (auto& ev : fresh) {
      seen_[ev.session_key].insert(ev.seq);
      sessions_[ev.session_key].push_back(std::move(ev));
    }
    receipt.accepted = static_cast<int64_t>(fresh.size());
  }
  return receipt;
}

void EventStore::append_batch(
    const std::map<std::string, std::vector<const TraceEvent*>>& per_session) {
  for (const auto& [key, events] : per_session) {
    fs::path path = sessions_dir_ / (encode_session_filename(key) + ".ndjson");
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw std::runtime_error("cannot open session log: " +
                                         path.string());
    std::string buf;
    for (const TraceEvent* ev : events) {
      buf += canonical_serialize(*ev);
      buf += '\n';
    }
    ssize_t written = ::write(fd, buf.data(), buf.size());
    bool ok = written == static_cast<ssize_t>(buf.size()) && ::fsync(fd) == 0;
    ::close(fd);
    if (!ok) throw std::runtime_error("short write to session log: " +
                                      path.string());
  }
}

SessionLog EventStore::load_session(const std::string& session_key) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(session_key);
  if (it == sessions_.end())
    throw NotFoundError("unknown session: " + session_key);
  SessionLog log;
  log.session_key = session_key;
  log.events = it->second;
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) {
                     return a.seq < b.seq;
                   });
  log.complete =
      !log.events.empty() && log.events.back().kind == EventKind::session_end;
  return log;
}

std::vector<std::string> EventStore::session_keys() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> keys;
  keys.reserve(sessions_.size());
  for (const auto& [key, _] : sessions_) keys.push_back(key);
  return keys;
}

size_t EventStore::event_count() const {
  std::shared_lock lock(mu_);
  size_t n = 0;
  for (const auto& [_, events] : sessions_) n += events.size();
  return n;
}

struct IngestService::Impl {
  explicit Impl(EventStore& s) : store(s) {}
  EventStore& store;
  httplib::Server server;
  std::thread thread;

  void wire_routes() {
    server.set_payload_max_length(1 << 20);  // typical batches are 30-50 kB
    server.Post("/v1/traces/events",
                [this](const httplib::Request& req, httplib::Response& res) {
                  try {
                    auto receipt = store.handle_ingest(req.body);
                    res.set_content(receipt.to_json(), "application/json");
                  } catch (const BodyParseError& e) {
                    nlohmann::ordered_json err;
                    err["error"] = e.what();
                    err["byte"] = e.byte;
                    res.status = 400;
                    res.set_content(err.dump(), "application/json");
                  } catch (const std::exception& e) {
                    nlohmann::ordered_json err;
                    err["error"] = e.what();
                    res.status = 500;
                    res.set_content(err.dump(), "application/json");
                  }
                });
    server.Get("/v1/sessions/:key", [this](const httplib::Request& req,
                                           httplib::Response& res) {
      try {
        auto log = store.load_session(req.path_params.at("key"));
        res.set_content(log.to_json(), "application/json");
      } catch (const NotFoundError& e) {
        nlohmann::ordered_json err;
        err["error"] = e.what();
        res.status = 404;
        res.set_content(err.dump(), "application/json");
      }
    });
    server.Get("/v1/healthz",
               [](const httplib::Request&, httplib::Response& res) {
                 res.set_content("{\"status\":\"ok\"}", "application/json");
               });
  }
};

IngestService::IngestService(EventStore& store)
    : impl_(std::make_unique<Impl>(store)) {
  impl_->wire_routes();
}

IngestService::~IngestService() { stop(); }

int IngestService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw ConfigError("cannot bind ingest service on " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw ConfigError("cannot bind ingest service on " + host + ":" +
                      std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

bool IngestService::run(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

void IngestService::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace clawtrace
