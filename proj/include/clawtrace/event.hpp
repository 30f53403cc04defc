#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

namespace clawtrace {

// The eight lifecycle hooks. Unknown kinds are rejected at ingest.
enum class EventKind {
  session_start,
  session_end,
  llm_input,
  llm_output,
  before_tool_call,
  after_tool_call,
  subagent_spawning,
  subagent_ended,
};

const char* to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

struct TokenUsage {
  int64_t input = 0;
  int64_t output = 0;
  int64_t cache_read = 0;
  int64_t cache_write = 0;

  TokenUsage operator+(const TokenUsage& o) const {
    return {input + o.input, output + o.output, cache_read + o.cache_read,
            cache_write + o.cache_write};
  }
  TokenUsage& operator+=(const TokenUsage& o) {
    *this = *this + o;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct ToolPayload {
  std::string tool_name;
  std::string args_text;
  std::optional<std::string> result_text;
  bool error = false;  // status: ok | error
  bool operator==(const ToolPayload&) const = default;
};

// One raw instrumentation record on the ingest wire. Kind-specific fields
// are flat on the wire document; anything unrecognized lands in extras.
struct TraceEvent {
  std::string session_key;
  int64_t seq = 0;
  int64_t ts = 0;  // UTC milliseconds
  EventKind kind = EventKind::session_start;
  std::string span_id;         // empty = absent
  std::string parent_span_id;  // empty = absent

  std::string model;    // session_start
  std::string outcome;  // session_end: success|partial|fail, empty = absent
  std::string text;     // llm_input prompt / llm_output completion
  std::optional<TokenUsage> tokens;        // llm_output
  std::string tool_name;                   // before_tool_call
  std::string args_text;                   // before_tool_call
  std::optional<std::string> result_text;  // after_tool_call
  bool tool_error = false;                 // after_tool_call status
  std::string child_session_key;           // subagent_spawning/ended

  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const TraceEvent&) const = default;
};

struct ValidationError {
  std::string path;
  std::string reason;
  std::string to_string() const { return path + ": " + reason; }
};

using ValidatedEvent = std::variant<TraceEvent, ValidationError>;

// Validates a parsed key-value document against the wire schema.
// Unknown extra fields are preserved; unknown kinds and missing or
// ill-typed required fields are rejected with a field path.
ValidatedEvent validate_event(const nlohmann::json& raw);

// Deterministic byte output: fixed key order, extras sorted, integers only.
// canonical_deserialize(canonical_serialize(e)) == e for every valid event.
std::string canonical_serialize(const TraceEvent& event);
TraceEvent canonical_deserialize(std::string_view bytes);

// Canonical JSON object for embedding in larger documents (session logs).
nlohmann::ordered_json event_to_json(const TraceEvent& event);

}  // namespace clawtrace
