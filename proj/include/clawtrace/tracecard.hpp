#pragma once

#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "clawtrace/cost.hpp"
#include "clawtrace/span_tree.hpp"

namespace clawtrace {

enum class RoleHint { planning, tool_call, error_recovery, final_reply,
                      intermediate };
const char* to_string(RoleHint hint);
std::optional<RoleHint> role_hint_from_string(std::string_view name);

struct CostSpanSummary {
  std::string span_id;
  SpanKind kind = SpanKind::llm;
  std::optional<RoleHint> role_hint;  // llm spans
  Money cost_usd;
  int64_t tokens_in = 0;
  int64_t tokens_out = 0;
  std::string args_sample;  // tool spans; llm spans that issued a tool call
  bool operator==(const CostSpanSummary&) const = default;
};

struct RedundantCluster {
  std::vector<std::string> cluster;  // span ids, >= 2
  std::string tool;
  double similarity = 0.0;  // minimum pairwise, >= 0.8
  bool operator==(const RedundantCluster&) const = default;
};

struct SubAgentSummary {
  std::string child_session_key;
  Money total_cost_usd;
  double output_used_in_final = 0.0;  // Jaccard fraction
  bool operator==(const SubAgentSummary&) const = default;
};

struct FailedStep {
  std::string span_id;
  std::string tool;
  std::string error_excerpt;  // <= 160 chars
  bool repaired = false;
  std::string repaired_by;  // later ok span of the same tool
  bool operator==(const FailedStep&) const = default;
};

// Compact per-session summary, compiled deterministically from the span
// tree. Field order in the YAML form follows the schema exactly.
struct TraceCard {
  std::string session_id;
  std::string model;
  bool has_costs = true;  // false once cost fields are stripped
  Money total_cost_usd;
  TokenUsage total_tokens;
  std::string outcome = "unknown";  // success | partial | fail | unknown
  std::vector<CostSpanSummary> top_cost_spans;  // cost desc, <= 5
  std::vector<RedundantCluster> redundant_tool_calls;
  std::vector<SubAgentSummary> sub_agents;
  std::vector<FailedStep> failed_or_repaired;
  bool operator==(const TraceCard&) const = default;
};

struct CompilerConfig {
  double similarity_threshold = 0.8;
  size_t top_k = 5;
  size_t args_sample_limit = 120;
  size_t error_excerpt_limit = 160;
  std::vector<std::string> failure_patterns;  // regex source, icase
  // Hook for argument normalization ahead of similarity; identity by default.
  std::function<std::string(const std::string&)> args_normalizer;
};

CompilerConfig default_compiler_config();

// Compiles patterns once; invalid regex raises ConfigError at load time.
std::vector<std::regex> compile_failure_patterns(
    const std::vector<std::string>& patterns);

// Greedy single-link clustering per tool name in span order; a call joins
// a cluster when its similarity to any member reaches the threshold.
std::vector<RedundantCluster> detect_redundancy(
    const SessionTree& tree, const CompilerConfig& config);

// Deterministic label for an llm span: error_recovery when the most recent
// closed tool before this turn errored, else tool_call when the span issued
// tool calls, else final_reply for the last turn, planning for turn 0,
// intermediate otherwise.
RoleHint classify_role(const Span& span, const SessionTree& tree);

// Jaccard overlap of a sub-agent's final output with the parent's final
// message. Absent child output yields 0 (diagnostic recorded by caller).
double subagent_usage(const std::string& child_final_output,
                      const std::string& parent_final_output);

// Failed = status error or result matching a pattern; repaired when a later
// ok call of the same tool has args similarity >= threshold.
std::vector<FailedStep> detect_failures(const SessionTree& tree,
                                        const CompilerConfig& config);

TraceCard compile_card(
    const SessionTree& tree, const PricingTable& pricing,
    const CompilerConfig& config,
    const std::map<std::string, const SessionTree*>& children = {});

// Copy with total_cost_usd and per-span cost_usd removed (ablation input).
TraceCard strip_costs(const TraceCard& card);

std::string truncate_with_marker(const std::string& text, size_t limit);

}  // namespace clawtrace
