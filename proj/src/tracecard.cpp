#include "clawtrace/tracecard.hpp"

#include <algorithm>

#include "clawtrace/errors.hpp"
#include "clawtrace/similarity.hpp"

namespace clawtrace {

namespace {

constexpr const char* kRoleNames[] = {"planning", "tool_call", "error_recovery",
                                      "final_reply", "intermediate"};

std::string normalized_args(const CompilerConfig& config, const Span& span) {
  const std::string& raw = span.tool ? span.tool->args_text : std::string();
  return config.args_normalizer ? config.args_normalizer(raw) : raw;
}

}  // namespace

const char* to_string(RoleHint hint) {
  return kRoleNames[static_cast<size_t>(hint)];
}

std::optional<RoleHint> role_hint_from_string(std::string_view name) {
  for (size_t i = 0; i < 5; ++i) {
    if (name == kRoleNames[i]) return static_cast<RoleHint>(i);
  }
  return std::nullopt;
}

CompilerConfig default_compiler_config() {
  CompilerConfig config;
  config.failure_patterns = {R"(\berror\b)", R"(\bexception\b)",
                             R"(\btraceback\b)", R"(\bfailed\b)"};
  return config;
}

std::vector<std::regex> compile_failure_patterns(
    const std::vector<std::string>& patterns) {
  std::vector<std::regex> compiled;
  compiled.reserve(patterns.size());
  for (const auto& p : patterns) {
    try {
      compiled.emplace_back(p, std::regex::icase | std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid failure pattern '" + p + "': " + e.what());
    }
  }
  return compiled;
}

std::string truncate_with_marker(const std::string& text, size_t limit) {
  if (text.size() <= limit) return text;
  return text.substr(0, limit - 3) + "...";
}

std::vector<RedundantCluster> detect_redundancy(const SessionTree& tree,
                                                const CompilerConfig& config) {
  struct Call {
    const Span* span;
    std::string args;
  };
  std::map<std::string, std::vector<Call>> by_tool;
  std::vector<std::string> tool_order;
  tree.for_each_span([&](const Span& s) {
    if (s.kind != SpanKind::tool || !s.tool) return;
    if (!by_tool.count(s.tool->tool_name)) tool_order.push_back(s.tool->tool_name);
    by_tool[s.tool->tool_name].push_back({&s, normalized_args(config, s)});
  });

  std::vector<RedundantCluster> clusters;
  for (const auto& tool : tool_order) {
    const auto& calls = by_tool[tool];
    std::vector<std::vector<size_t>> groups;
    for (size_t i = 0; i < calls.size(); ++i) {
      bool placed = false;
      for (auto& group : groups) {
        for (size_t member : group) {
          if (normalized_similarity(calls[i].args, calls[member].args) >=
              config.similarity_threshold) {
            group.push_back(i);
            placed = true;
            break;
          }
        }
        if (placed) break;
      }
      if (!placed) groups.push_back({i});
    }
    for (const auto& group : groups) {
      if (group.size() < 2) continue;
      RedundantCluster cluster;
      cluster.tool = tool;
      cluster.similarity = 1.0;
      for (size_t a = 0; a < group.size(); ++a) {
        cluster.cluster.push_back(calls[group[a]].span->span_id);
        for (size_t b = a + 1; b < group.size(); ++b) {
          cluster.similarity = std::min(
              cluster.similarity,
              normalized_similarity(calls[group[a]].args, calls[group[b]].args));
        }
      }
      clusters.push_back(std::move(cluster));
    }
  }
  return clusters;
}

RoleHint classify_role(const Span& span, const SessionTree& tree) {
  // The agent action immediately before this turn: the latest tool result
  // before this llm_input, unless another llm turn started in between.
  const Span* last_tool = nullptr;
  const Span* prev_llm = nullptr;
  tree.for_each_span([&](const Span& s) {
    if (s.open_event >= span.open_event || &s == &span) return;
    if (s.kind == SpanKind::tool && s.close_event >= 0 &&
        s.close_event < span.open_event) {
      if (!last_tool || s.close_event > last_tool->close_event) last_tool = &s;
    }
    if (s.kind == SpanKind::llm) {
      if (!prev_llm || s.open_event > prev_llm->open_event) prev_llm = &s;
    }
  });
  if (last_tool && last_tool->tool && last_tool->tool->error &&
      (!prev_llm || last_tool->close_event > prev_llm->open_event))
    return RoleHint::error_recovery;

  size_t tool_children = 0;
  for (const auto& c : span.children)
    if (c.kind == SpanKind::tool) ++tool_children;
  if (tool_children > 0) return RoleHint::tool_call;

  int max_turn = -1;
  tree.for_each_span([&](const Span& s) {
    if (s.turn_index) max_turn = std::max(max_turn, *s.turn_index);
  });
  if (span.turn_index && *span.turn_index == max_turn)
    return RoleHint::final_reply;
  if (span.turn_index && *span.turn_index == 0) return RoleHint::planning;
  return RoleHint::intermediate;
}

double subagent_usage(const std::string& child_final_output,
                      const std::string& parent_final_output) {
  if (child_final_output.empty()) return 0.0;
  return jaccard_text(child_final_output, parent_final_output);
}

std::vector<FailedStep> detect_failures(const SessionTree& tree,
                                        const CompilerConfig& config) {
  auto patterns = compile_failure_patterns(config.failure_patterns);
  struct ToolCall {
    const Span* span;
    std::string args;
  };
  std::vector<ToolCall> calls;
  tree.for_each_span([&](const Span& s) {
    if (s.kind == SpanKind::tool && s.tool)
      calls.push_back({&s, normalized_args(config, s)});
  });

  std::vector<FailedStep> failures;
  for (size_t i = 0; i < calls.size(); ++i) {
    const Span& s = *calls[i].span;
    bool failed = s.tool->error;
    const std::string result = s.tool->result_text.value_or("");
    if (!failed) {
      for (const auto& re : patterns) {
        if (std::regex_search(result, re)) {
          failed = true;
          break;
        }
      }
    }
    if (!failed) continue;

    FailedStep step;
    step.span_id = s.span_id;
    step.tool = s.tool->tool_name;
    step.error_excerpt = truncate_with_marker(
        result.empty() ? "status=error" : result, config.error_excerpt_limit);
    for (size_t j = i + 1; j < calls.size(); ++j) {
      const Span& later = *calls[j].span;
      if (later.tool->tool_name != s.tool->tool_name || later.tool->error)
        continue;
      if (normalized_similarity(calls[i].args, calls[j].args) >=
          config.similarity_threshold) {
        step.repaired = true;
        step.repaired_by = later.span_id;
        break;
      }
    }
    failures.push_back(std::move(step));
  }
  return failures;
}

TraceCard compile_card(const SessionTree& tree, const PricingTable& pricing,
                       const CompilerConfig& config,
                       const std::map<std::string, const SessionTree*>& children) {
  TraceCard card;
  card.session_id = tree.session_key;
  card.model = tree.model;
  card.outcome = tree.outcome.value_or("unknown");

  SessionCost cost = session_cost(tree, pricing);
  card.total_cost_usd = cost.total;
  card.total_tokens = cost.total_tokens;

  // Rank every costed span; zero-cost spans never displace a costed one
  // and are not listed.
  std::vector<const Span*> ranked;
  tree.for_each_span([&](const Span& s) {
    auto it = cost.per_span.find(s.span_id);
    if (it != cost.per_span.end() && it->second.total_usd > Money{})
      ranked.push_back(&s);
  });
  std::sort(ranked.begin(), ranked.end(), [&](const Span* a, const Span* b) {
    const Money ca = cost.per_span.at(a->span_id).total_usd;
    const Money cb = cost.per_span.at(b->span_id).total_usd;
    if (ca != cb) return ca > cb;
    return a->span_id < b->span_id;
  });
  if (ranked.size() > config.top_k) ranked.resize(config.top_k);
  for (const Span* s : ranked) {
    CostSpanSummary sum;
    sum.span_id = s->span_id;
    sum.kind = s->kind;
    if (s->kind == SpanKind::llm) sum.role_hint = classify_role(*s, tree);
    sum.cost_usd = cost.per_span.at(s->span_id).total_usd;
    sum.tokens_in = s->tokens.input;
    sum.tokens_out = s->tokens.output;
    const Span* first_tool = nullptr;
    for (const auto& c : s->children) {
      if (c.kind == SpanKind::tool) {
        first_tool = &c;
        break;
      }
    }
    if (s->kind == SpanKind::tool && s->tool) {
      sum.args_sample =
          truncate_with_marker(s->tool->args_text, config.args_sample_limit);
    } else if (first_tool && first_tool->tool) {
      sum.args_sample = truncate_with_marker(first_tool->tool->args_text,
                                             config.args_sample_limit);
    }
    card.top_cost_spans.push_back(std::move(sum));
  }

  card.redundant_tool_calls = detect_redundancy(tree, config);

  // One entry per resolved child link; children whose events never arrived
  // stay flagged on the call graph rather than appearing with zero cost.
  for (const auto& link : tree.child_links) {
    auto it = children.find(link.child_session_key);
    if (it == children.end() || !it->second) continue;
    SubAgentSummary sub;
    sub.child_session_key = link.child_session_key;
    sub.total_cost_usd = session_cost(*it->second, pricing).total;
    sub.output_used_in_final =
        subagent_usage(it->second->final_output(), tree.final_output());
    card.sub_agents.push_back(std::move(sub));
  }

  card.failed_or_repaired = detect_failures(tree, config);
  return card;
}

TraceCard strip_costs(const TraceCard& card) {
  TraceCard stripped = card;
  stripped.has_costs = false;
  stripped.total_cost_usd = Money{};
  for (auto& span : stripped.top_cost_spans) span.cost_usd = Money{};
  return stripped;
}

}  // namespace clawtrace
