#include "clawtrace/span_tree.hpp"

#include <algorithm>
#include <sstream>

#include "clawtrace/errors.hpp"

namespace clawtrace {

const char* to_string(SpanKind kind) {
  switch (kind) {
    case SpanKind::llm: return "llm";
    case SpanKind::tool: return "tool";
    case SpanKind::subagent: return "subagent";
  }
  return "?";
}

namespace {

void walk(const Span& span, const std::function<void(const Span&)>& fn) {
  fn(span);
  for (const auto& child : span.children) walk(child, fn);
}

struct Builder {
  std::vector<Span> pool;
  std::vector<int> parent;      // pool index -> parent pool index or -1
  std::vector<int> open_stack;  // pool indices, outermost first
  int next_turn = 0;

  int open(Span span, int parent_idx, int event_index) {
    span.open_ordinal = static_cast<int>(pool.size());
    span.open_event = event_index;
    if (span.span_id.empty())
      span.span_id = "span-" + std::to_string(span.open_ordinal);
    pool.push_back(std::move(span));
    parent.push_back(parent_idx);
    open_stack.push_back(static_cast<int>(pool.size()) - 1);
    return static_cast<int>(pool.size()) - 1;
  }

  // Innermost open span of the given kind, optionally matching span_id.
  int find_open(SpanKind kind, const std::string& span_id) {
    for (auto it = open_stack.rbegin(); it != open_stack.rend(); ++it) {
      const Span& s = pool[*it];
      if (s.kind != kind) continue;
      if (!span_id.empty() && s.span_id != span_id) continue;
      return *it;
    }
    return -1;
  }

  void close(int idx, int64_t end_ms, int ordinal, int event_index) {
    pool[idx].end_ms = end_ms;
    pool[idx].close_ordinal = ordinal;
    pool[idx].close_event = event_index;
    open_stack.erase(std::remove(open_stack.begin(), open_stack.end(), idx),
                     open_stack.end());
  }
};

Span assemble(Builder& b, int idx, const std::vector<std::vector<int>>& kids) {
  Span span = std::move(b.pool[idx]);
  for (int child : kids[idx]) span.children.push_back(assemble(b, child, kids));
  return span;
}

}  // namespace

SessionTree build_tree(const SessionLog& log) {
  SessionTree tree;
  tree.session_key = log.session_key;

  auto start_it =
      std::find_if(log.events.begin(), log.events.end(), [](const TraceEvent& e) {
        return e.kind == EventKind::session_start;
      });
  if (start_it == log.events.end())
    throw MalformedSessionError("session " + log.session_key +
                                " has no session_start event");
  if (start_it != log.events.begin())
    tree.diagnostics.push_back("events precede session_start");
  tree.model = start_it->model;
  tree.start_ms = start_it->ts;
  tree.end_ms = start_it->ts;

  Builder b;
  int close_counter = 0;
  bool ended = false;

  for (size_t event_index = 0; event_index < log.events.size(); ++event_index) {
    const auto& ev = log.events[event_index];
    const int ei = static_cast<int>(event_index);
    if (ended && ev.kind != EventKind::session_end)
      tree.diagnostics.push_back("event seq " + std::to_string(ev.seq) +
                                 " after session_end");
    tree.end_ms = std::max(tree.end_ms, ev.ts);
    switch (ev.kind) {
      case EventKind::session_start:
        if (&*start_it != &ev)
          tree.diagnostics.push_back("duplicate session_start at seq " +
                                     std::to_string(ev.seq));
        break;

      case EventKind::llm_input: {
        Span s;
        s.kind = SpanKind::llm;
        s.span_id = ev.span_id;
        s.start_ms = ev.ts;
        s.end_ms = ev.ts;
        s.turn_index = b.next_turn++;
        int parent = b.find_open(SpanKind::llm, "");
        b.open(std::move(s), parent, ei);
        break;
      }

      case EventKind::llm_output: {
        int idx = b.find_open(SpanKind::llm, ev.span_id);
        if (idx < 0) {
          // Keep the usage so token conservation holds over the tree.
          tree.diagnostics.push_back("orphan llm_output at seq " +
                                     std::to_string(ev.seq));
          Span s;
          s.kind = SpanKind::llm;
          s.span_id = ev.span_id;
          s.start_ms = ev.ts;
          s.turn_index = b.next_turn++;
          s.error = true;
          if (ev.tokens) s.tokens = *ev.tokens;
          s.output_text = ev.text;
          int i = b.open(std::move(s), -1, ei);
          b.close(i, ev.ts, close_counter++, ei);
          break;
        }
        if (ev.tokens) b.pool[idx].tokens = *ev.tokens;
        b.pool[idx].output_text = ev.text;
        b.close(idx, ev.ts, close_counter++, ei);
        break;
      }

      case EventKind::before_tool_call: {
        Span s;
        s.kind = SpanKind::tool;
        s.span_id = ev.span_id;
        s.start_ms = ev.ts;
        s.end_ms = ev.ts;
        ToolPayload payload;
        payload.tool_name = ev.tool_name;
        payload.args_text = ev.args_text;
        s.tool = std::move(payload);
        int parent = b.find_open(SpanKind::llm, "");
        if (parent < 0)
          tree.diagnostics.push_back("tool call outside any llm turn at seq " +
                                     std::to_string(ev.seq));
        b.open(std::move(s), parent, ei);
        break;
      }

      case EventKind::after_tool_call: {
        int idx = b.find_open(SpanKind::tool, ev.span_id);
        if (idx < 0) {
          tree.diagnostics.push_back("orphan after_tool_call at seq " +
                                     std::to_string(ev.seq));
          break;
        }
        Span& s = b.pool[idx];
        s.tool->result_text = ev.result_text;
        s.tool->error = ev.tool_error;
        s.error = ev.tool_error;
        b.close(idx, ev.ts, close_counter++, ei);
        break;
      }

      case EventKind::subagent_spawning: {
        Span s;
        s.kind = SpanKind::subagent;
        s.span_id = ev.span_id;
        s.start_ms = ev.ts;
        s.end_ms = ev.ts;
        s.child_session_key = ev.child_session_key;
        int parent = b.find_open(SpanKind::llm, "");
        int idx = b.open(std::move(s), parent, ei);
        tree.child_links.push_back(
            {ev.child_session_key, b.pool[idx].span_id});
        break;
      }

      case EventKind::subagent_ended: {
        int idx = -1;
        for (auto it = b.open_stack.rbegin(); it != b.open_stack.rend(); ++it) {
          const Span& s = b.pool[*it];
          if (s.kind != SpanKind::subagent) continue;
          if (!ev.child_session_key.empty() &&
              s.child_session_key != ev.child_session_key)
            continue;
          idx = *it;
          break;
        }
        if (idx < 0) {
          tree.diagnostics.push_back("orphan subagent_ended at seq " +
                                     std::to_string(ev.seq));
          break;
        }
        b.close(idx, ev.ts, close_counter++, ei);
        break;
      }

      case EventKind::session_end:
        ended = true;
        if (!ev.outcome.empty()) tree.outcome = ev.outcome;
        break;
    }
  }

  if (!ended) tree.diagnostics.push_back("no session_end event");
  // Crashed or truncated sessions still compile: close what is left open.
  while (!b.open_stack.empty()) {
    int idx = b.open_stack.back();
    tree.diagnostics.push_back("span " + b.pool[idx].span_id +
                               " unclosed at session end");
    b.pool[idx].error = true;
    b.close(idx, tree.end_ms, close_counter++,
            static_cast<int>(log.events.size()));
  }

  std::vector<std::vector<int>> kids(b.pool.size());
  std::vector<int> root_indices;
  for (size_t i = 0; i < b.pool.size(); ++i) {
    if (b.parent[i] >= 0)
      kids[b.parent[i]].push_back(static_cast<int>(i));
    else
      root_indices.push_back(static_cast<int>(i));
  }
  for (int r : root_indices) tree.roots.push_back(assemble(b, r, kids));

  // Clamp child intervals into their parents.
  std::function<void(Span&)> clamp = [&](Span& s) {
    for (auto& c : s.children) {
      if (c.end_ms > s.end_ms) {
        c.end_ms = s.end_ms;
        tree.diagnostics.push_back("span " + c.span_id +
                                   " clamped to parent interval");
      }
      if (c.start_ms < s.start_ms) c.start_ms = s.start_ms;
      clamp(c);
    }
  };
  for (auto& r : tree.roots) clamp(r);
  return tree;
}

void SessionTree::for_each_span(
    const std::function<void(const Span&)>& fn) const {
  std::vector<const Span*> all;
  for (const auto& r : roots)
    walk(r, [&](const Span& s) { all.push_back(&s); });
  std::sort(all.begin(), all.end(), [](const Span* a, const Span* b) {
    return a->open_ordinal < b->open_ordinal;
  });
  for (const Span* s : all) fn(*s);
}

const Span* SessionTree::find_span(const std::string& span_id) const {
  const Span* found = nullptr;
  for_each_span([&](const Span& s) {
    if (!found && s.span_id == span_id) found = &s;
  });
  return found;
}

std::string SessionTree::final_output() const {
  const Span* last = nullptr;
  for_each_span([&](const Span& s) {
    if (s.kind != SpanKind::llm || !s.turn_index) return;
    if (!last || *s.turn_index > *last->turn_index) last = &s;
  });
  return last ? last->output_text : std::string();
}

size_t SessionTree::span_count() const {
  size_t n = 0;
  for_each_span([&](const Span&) { ++n; });
  return n;
}

LinkageMap build_linkage(const std::vector<SessionTree>& trees) {
  LinkageMap map;
  for (const auto& tree : trees) {
    for (const auto& link : tree.child_links) {
      auto [it, inserted] = map.entries.emplace(
          link.child_session_key,
          std::make_pair(tree.session_key, link.parent_span_id));
      (void)it;
      (void)inserted;  // a child spawned twice keeps its first registration
    }
  }
  return map;
}

CallGraph resolve_links(std::vector<SessionTree> trees, const LinkageMap& map) {
  CallGraph graph;
  for (auto& t : trees) graph.sessions.emplace(t.session_key, std::move(t));

  // Cycle check over child -> parent edges.
  for (const auto& [child, parent] : map.entries) {
    std::vector<std::string> chain{child};
    std::string cur = parent.first;
    while (true) {
      if (std::find(chain.begin(), chain.end(), cur) != chain.end()) {
        chain.push_back(cur);
        chain.erase(chain.begin(),
                    std::find(chain.begin(), chain.end(), cur));
        throw LinkageCycleError(chain);
      }
      chain.push_back(cur);
      auto it = map.entries.find(cur);
      if (it == map.entries.end()) break;
      cur = it->second.first;
    }
  }

  std::set<std::string> attached_children;
  for (const auto& [child, parent] : map.entries) {
    if (!graph.sessions.count(child)) {
      graph.unresolved.push_back({child, parent.second});
      continue;
    }
    graph.attached[parent.first].push_back({child, parent.second});
    attached_children.insert(child);
  }
  for (const auto& [key, _] : graph.sessions) {
    if (!attached_children.count(key)) graph.roots.push_back(key);
  }
  return graph;
}

namespace {

void render_span(const Span& s, int depth, const CostAnnotations* costs,
                 std::ostringstream& os) {
  for (int i = 0; i < depth; ++i) os << "  ";
  os << "- " << s.span_id << " " << to_string(s.kind);
  if (s.turn_index) os << " turn=" << *s.turn_index;
  if (s.kind == SpanKind::tool && s.tool) os << " " << s.tool->tool_name;
  if (s.kind == SpanKind::subagent) os << " child=" << s.child_session_key;
  os << " " << (s.end_ms - s.start_ms) << "ms";
  os << " [" << (s.error ? "error" : "ok") << "]";
  if (s.kind == SpanKind::llm)
    os << " tokens(in=" << s.tokens.input << ",out=" << s.tokens.output
       << ",cr=" << s.tokens.cache_read << ",cw=" << s.tokens.cache_write
       << ")";
  if (costs) {
    auto it = costs->find(s.span_id);
    if (it != costs->end()) os << " $" << it->second;
  }
  os << "\n";
  for (const auto& c : s.children) render_span(c, depth + 1, costs, os);
}

}  // namespace

std::string render_tree(const SessionTree& tree, const CostAnnotations* costs) {
  std::ostringstream os;
  os << "session " << tree.session_key;
  if (!tree.model.empty()) os << " model=" << tree.model;
  os << " spans=" << tree.span_count() << " duration="
     << (tree.end_ms - tree.start_ms) << "ms";
  if (tree.outcome) os << " outcome=" << *tree.outcome;
  os << "\n";
  for (const auto& r : tree.roots) render_span(r, 0, costs, os);
  for (const auto& d : tree.diagnostics) os << "! " << d << "\n";
  return os.str();
}

std::string render_timeline(const SessionTree& tree) {
  constexpr int kBarWidth = 40;
  int64_t window = std::max<int64_t>(1, tree.end_ms - tree.start_ms);

  size_t id_width = 4;
  tree.for_each_span([&](const Span& s) {
    id_width = std::max(id_width, s.span_id.size());
  });

  std::ostringstream os;
  os << "timeline " << tree.session_key << " window=" << window << "ms\n";
  tree.for_each_span([&](const Span& s) {
    int64_t offset = s.start_ms - tree.start_ms;
    int64_t duration = std::max<int64_t>(0, s.end_ms - s.start_ms);
    int begin = static_cast<int>(offset * kBarWidth / window);
    int len = static_cast<int>(duration * kBarWidth / window);
    begin = std::min(begin, kBarWidth - 1);
    if (len < 1) len = 1;
    if (begin + len > kBarWidth) len = kBarWidth - begin;
    std::string bar(kBarWidth, ' ');
    for (int i = 0; i < len; ++i) bar[begin + i] = '#';
    std::string id = s.span_id;
    id.resize(id_width, ' ');
    std::string kind = to_string(s.kind);
    kind.resize(8, ' ');
    os << id << " " << kind << " |" << bar << "| " << duration << "ms";
    if (s.kind == SpanKind::tool && s.tool) os << " " << s.tool->tool_name;
    os << "\n";
  });
  return os.str();
}

}  // namespace clawtrace
