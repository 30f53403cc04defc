#include "clawtrace/event.hpp"

#include <array>
#include <set>

#include "clawtrace/errors.hpp"

namespace clawtrace {

namespace {

constexpr std::array<const char*, 8> kKindNames = {
    "session_start",     "session_end",     "llm_input",
    "llm_output",        "before_tool_call", "after_tool_call",
    "subagent_spawning", "subagent_ended"};

// Wire keys consumed by the schema; everything else is an extra.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "session_key", "seq",       "ts",          "kind",
      "span_id",     "parent_span_id",           "model",
      "outcome",     "text",      "tokens",      "tool_name",
      "args_text",   "result_text", "status",    "child_session_key"};
  return keys;
}

std::optional<std::string> get_string(const nlohmann::json& doc,
                                      const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

bool has_nonnull(const nlohmann::json& doc, const char* key) {
  auto it = doc.find(key);
  return it != doc.end() && !it->is_null();
}

}  // namespace

const char* to_string(EventKind kind) {
  return kKindNames[static_cast<size_t>(kind)];
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (size_t i = 0; i < kKindNames.size(); ++i) {
    if (name == kKindNames[i]) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

ValidatedEvent validate_event(const nlohmann::json& raw) {
  if (!raw.is_object())
    return ValidationError{"", "event document must be a JSON object"};

  TraceEvent ev;

  auto key = get_string(raw, "session_key");
  if (!key || key->empty())
    return ValidationError{"session_key", "missing or not a non-empty string"};
  ev.session_key = *key;

  if (!has_nonnull(raw, "seq") || !raw["seq"].is_number_integer())
    return ValidationError{"seq", "missing or not an integer"};
  ev.seq = raw["seq"].get<int64_t>();
  if (ev.seq < 0) return ValidationError{"seq", "must be >= 0"};

  if (!has_nonnull(raw, "ts") || !raw["ts"].is_number_integer())
    return ValidationError{"ts", "missing or not an integer"};
  ev.ts = raw["ts"].get<int64_t>();
  if (ev.ts < 0) return ValidationError{"ts", "must be >= 0"};

  auto kind_name = get_string(raw, "kind");
  if (!kind_name) return ValidationError{"kind", "missing or not a string"};
  auto kind = event_kind_from_string(*kind_name);
  if (!kind) return ValidationError{"kind", "unknown event kind"};
  ev.kind = *kind;

  if (has_nonnull(raw, "span_id")) {
    auto s = get_string(raw, "span_id");
    if (!s) return ValidationError{"span_id", "must be a string"};
    ev.span_id = *s;
  }
  if (has_nonnull(raw, "parent_span_id")) {
    auto s = get_string(raw, "parent_span_id");
    if (!s) return ValidationError{"parent_span_id", "must be a string"};
    ev.parent_span_id = *s;
  }

  switch (ev.kind) {
    case EventKind::session_start:
      if (has_nonnull(raw, "model")) {
        auto m = get_string(raw, "model");
        if (!m) return ValidationError{"model", "must be a string"};
        ev.model = *m;
      }
      break;
    case EventKind::session_end:
      if (has_nonnull(raw, "outcome")) {
        auto o = get_string(raw, "outcome");
        if (!o || (*o != "success" && *o != "partial" && *o != "fail"))
          return ValidationError{"outcome",
                                 "must be one of success|partial|fail"};
        ev.outcome = *o;
      }
      break;
    case EventKind::llm_input:
      if (has_nonnull(raw, "text")) {
        auto t = get_string(raw, "text");
        if (!t) return ValidationError{"text", "must be a string"};
        ev.text = *t;
      }
      break;
    case EventKind::llm_output: {
      if (has_nonnull(raw, "tokens")) {
        const auto& tok = raw["tokens"];
        if (!tok.is_object())
          return ValidationError{"tokens", "must be an object"};
        TokenUsage usage;
        struct Field {
          const char* key;
          int64_t* slot;
        };
        Field fields[] = {{"input", &usage.input},
                          {"output", &usage.output},
                          {"cacheRead", &usage.cache_read},
                          {"cacheWrite", &usage.cache_write}};
        for (const auto& f : fields) {
          auto it = tok.find(f.key);
          if (it == tok.end()) continue;
          if (!it->is_number_integer() || it->get<int64_t>() < 0)
            return ValidationError{std::string("tokens.") + f.key,
                                   "must be a non-negative integer"};
          *f.slot = it->get<int64_t>();
        }
        ev.tokens = usage;
      }
      if (has_nonnull(raw, "text")) {
        auto t = get_string(raw, "text");
        if (!t) return ValidationError{"text", "must be a string"};
        ev.text = *t;
      }
      break;
    }
    case EventKind::before_tool_call: {
      auto name = get_string(raw, "tool_name");
      if (!name || name->empty())
        return ValidationError{"tool_name", "missing or not a non-empty string"};
      ev.tool_name = *name;
      auto args = get_string(raw, "args_text");
      if (!args) return ValidationError{"args_text", "missing or not a string"};
      ev.args_text = *args;
      break;
    }
    case EventKind::after_tool_call: {
      auto status = get_string(raw, "status");
      if (!status || (*status != "ok" && *status != "error"))
        return ValidationError{"status", "must be ok or error"};
      ev.tool_error = *status == "error";
      if (has_nonnull(raw, "result_text")) {
        auto r = get_string(raw, "result_text");
        if (!r) return ValidationError{"result_text", "must be a string"};
        ev.result_text = *r;
      }
      break;
    }
    case EventKind::subagent_spawning: {
      auto child = get_string(raw, "child_session_key");
      if (!child || child->empty())
        return ValidationError{"child_session_key",
                               "missing or not a non-empty string"};
      ev.child_session_key = *child;
      break;
    }
    case EventKind::subagent_ended:
      if (has_nonnull(raw, "child_session_key")) {
        auto child = get_string(raw, "child_session_key");
        if (!child)
          return ValidationError{"child_session_key", "must be a string"};
        ev.child_session_key = *child;
      }
      break;
  }

  // Forward compatibility: keep everything we did not consume.
  for (const auto& [k, v] : raw.items()) {
    if (!known_keys().count(k)) ev.extras[k] = v;
  }
  return ev;
}

nlohmann::ordered_json event_to_json(const TraceEvent& ev) {
  nlohmann::ordered_json o;
  o["session_key"] = ev.session_key;
  o["seq"] = ev.seq;
  o["ts"] = ev.ts;
  o["kind"] = to_string(ev.kind);
  if (!ev.span_id.empty()) o["span_id"] = ev.span_id;
  if (!ev.parent_span_id.empty()) o["parent_span_id"] = ev.parent_span_id;
  if (!ev.model.empty()) o["model"] = ev.model;
  if (!ev.outcome.empty()) o["outcome"] = ev.outcome;
  if (!ev.text.empty()) o["text"] = ev.text;
  if (ev.tokens) {
    nlohmann::ordered_json tok;
    tok["input"] = ev.tokens->input;
    tok["output"] = ev.tokens->output;
    tok["cacheRead"] = ev.tokens->cache_read;
    tok["cacheWrite"] = ev.tokens->cache_write;
    o["tokens"] = std::move(tok);
  }
  if (!ev.tool_name.empty()) o["tool_name"] = ev.tool_name;
  if (ev.kind == EventKind::before_tool_call) o["args_text"] = ev.args_text;
  if (ev.result_text) o["result_text"] = *ev.result_text;
  if (ev.kind == EventKind::after_tool_call)
    o["status"] = ev.tool_error ? "error" : "ok";
  if (!ev.child_session_key.empty())
    o["child_session_key"] = ev.child_session_key;
  // nlohmann::json objects iterate keys in sorted order and nested objects
  // serialize sorted as well, so extras come out canonical.
  for (const auto& [k, v] : ev.extras.items()) o[k] = v;
  return o;
}

std::string canonical_serialize(const TraceEvent& event) {
  return event_to_json(event).dump();
}

TraceEvent canonical_deserialize(std::string_view bytes) {
  nlohmann::json doc = nlohmann::json::parse(bytes);
  auto validated = validate_event(doc);
  if (auto* err = std::get_if<ValidationError>(&validated))
    throw ConfigError("canonical event failed validation: " + err->to_string());
  return std::get<TraceEvent>(std::move(validated));
}

}  // namespace clawtrace
