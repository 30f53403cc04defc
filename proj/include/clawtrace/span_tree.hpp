#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clawtrace/event.hpp"
#include "clawtrace/ingest.hpp"

namespace clawtrace {

enum class SpanKind { llm, tool, subagent };
const char* to_string(SpanKind kind);

struct Span {
  std::string span_id;
  SpanKind kind = SpanKind::llm;
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  TokenUsage tokens;                // llm spans
  std::optional<ToolPayload> tool;  // tool spans
  std::string child_session_key;    // subagent spans
  bool error = false;
  std::vector<Span> children;
  std::optional<int> turn_index;  // llm spans only, dense from 0
  std::string output_text;        // llm completion text
  int open_ordinal = 0;           // 0-based span-open order in the session
  int close_ordinal = -1;
  int open_event = -1;   // index of the opening event in the seq-ordered log
  int close_event = -1;  // index of the closing event
};

struct ChildLink {
  std::string child_session_key;
  std::string parent_span_id;
  bool operator==(const ChildLink&) const = default;
};

struct SessionTree {
  std::string session_key;
  std::string model;
  int64_t start_ms = 0;
  int64_t end_ms = 0;
  std::vector<Span> roots;
  std::optional<std::string> outcome;  // success | partial | fail
  std::vector<ChildLink> child_links;
  std::vector<std::string> diagnostics;

  // Depth-first, span-open order.
  void for_each_span(const std::function<void(const Span&)>& fn) const;
  const Span* find_span(const std::string& span_id) const;
  // Output text of the last llm turn (empty when none).
  std::string final_output() const;
  size_t span_count() const;
};

// childSessionKey -> (parent session, parent span); persists across
// ingest batches because it is re-derived from the full logs.
struct LinkageMap {
  std::map<std::string, std::pair<std::string, std::string>> entries;
};

// Deterministic tree construction from a seq-ordered event log.
// Throws MalformedSessionError when session_start is missing; orphan
// end-events and unclosed spans are diagnosed, not fatal.
SessionTree build_tree(const SessionLog& log);

LinkageMap build_linkage(const std::vector<SessionTree>& trees);

struct CallGraph {
  std::map<std::string, SessionTree> sessions;
  std::vector<std::string> roots;  // sessions that are no one's child
  // parent session -> (child key, parent span id), resolution order
  std::map<std::string, std::vector<ChildLink>> attached;
  std::vector<ChildLink> unresolved;  // child events never arrived
};

// Attaches child sessions beneath their parent spans. Unresolved children
// are flagged, not dropped. Throws LinkageCycleError on cyclic linkage.
CallGraph resolve_links(std::vector<SessionTree> trees, const LinkageMap& map);

// Per-span cost annotations keyed by span_id (filled by the cost model).
using CostAnnotations = std::map<std::string, std::string>;

// One line per span; deterministic. Cost column appears when annotations
// are supplied.
std::string render_tree(const SessionTree& tree,
                        const CostAnnotations* costs = nullptr);
// Text Gantt: bar length scales with wall-clock duration.
std::string render_timeline(const SessionTree& tree);

}  // namespace clawtrace
