#include "clawtrace/tracecard.hpp"

#include <set>

#include "doctest.h"

#include "clawtrace/card_yaml.hpp"
#include "clawtrace/errors.hpp"
#include "clawtrace/similarity.hpp"
#include "clawtrace/synth.hpp"

using namespace clawtrace;

namespace {

SessionTree tree_from(const std::vector<TraceEvent>& events) {
  SessionLog log;
  log.session_key = events.front().session_key;
  log.events = events;
  return build_tree(log);
}

// Five-turn session shaped like the example card: two near-identical
// read_file calls (spans 3 and 7) plus a final reply.
std::vector<TraceEvent> card_shape_session() {
  std::vector<TraceEvent> events;
  int64_t seq = 0, ts = 1000;
  auto add = [&](EventKind kind) -> TraceEvent& {
    TraceEvent ev;
    ev.session_key = "sb-task-shape";
    ev.seq = seq++;
    ev.ts = ts += 25;
    ev.kind = kind;
    events.push_back(std::move(ev));
    return events.back();
  };
  add(EventKind::session_start).model = "openai-codex/gpt-5.4";
  struct Turn {
    const char* tool;
    std::string args;
    TokenUsage usage;
  };
  Turn turns[] = {
      {"list_dir", "list_dir('.')", {600, 90, 0, 0}},
      {"read_file", synth_args_base(), {4200, 890, 2000, 400}},
      {"run_sql", "run_sql('select count(*) from t')", {700, 120, 500, 0}},
      {"read_file", synth_args_close(), {3800, 720, 3000, 200}},
      {nullptr, "", {2100, 980, 2950, 600}},
  };
  for (const Turn& turn : turns) {
    add(EventKind::llm_input);
    if (turn.tool) {
      add(EventKind::before_tool_call).tool_name = turn.tool;
      events.back().args_text = turn.args;
      add(EventKind::after_tool_call).result_text = "ok";
    }
    auto& out = add(EventKind::llm_output);
    out.tokens = turn.usage;
    out.text = turn.tool ? "working" : "final totals written";
  }
  add(EventKind::session_end).outcome = "success";
  return events;
}

}  // namespace

TEST_CASE("redundancy detector: identical calls cluster at similarity 1.0") {
  Rng rng(1);
  SessionSpec spec;
  spec.key = "dup";
  spec.turns = 3;
  spec.tools_per_turn = 0;
  auto events = synth_session(spec, rng);
  // Hand-plant two identical reads into the first two turns.
  std::vector<TraceEvent> with_tools;
  int64_t seq = 0;
  int llm_inputs = 0;
  for (auto ev : events) {
    ev.seq = seq++;
    bool inject = ev.kind == EventKind::llm_input && llm_inputs < 2;
    if (ev.kind == EventKind::llm_input) ++llm_inputs;
    with_tools.push_back(ev);
    if (inject) {
      TraceEvent before;
      before.session_key = spec.key;
      before.seq = seq++;
      before.ts = ev.ts + 1;
      before.kind = EventKind::before_tool_call;
      before.tool_name = "read_file";
      before.args_text = "read_file('same.xlsx')";
      with_tools.push_back(before);
      TraceEvent after;
      after.session_key = spec.key;
      after.seq = seq++;
      after.ts = ev.ts + 2;
      after.kind = EventKind::after_tool_call;
      after.result_text = "data";
      with_tools.push_back(after);
    }
  }
  auto clusters = detect_redundancy(tree_from(with_tools),
                                    default_compiler_config());
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].tool == "read_file");
  CHECK(clusters[0].cluster.size() == 2);
  CHECK(clusters[0].similarity == 1.0);
}

TEST_CASE("redundancy detector: example-shape session flags span-3/span-7 at 0.94") {
  auto tree = tree_from(card_shape_session());
  auto clusters = detect_redundancy(tree, default_compiler_config());
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].cluster == std::vector<std::string>{"span-3", "span-7"});
  CHECK(clusters[0].tool == "read_file");
  CHECK(clusters[0].similarity == doctest::Approx(0.94));
}

TEST_CASE("redundancy detector: 0.75-similar calls do not cluster") {
  // Exhaustive-pairwise oracle: only pairs at or above 0.8 may cluster.
  std::vector<TraceEvent> events;
  int64_t seq = 0;
  auto add = [&](EventKind kind) -> TraceEvent& {
    TraceEvent ev;
    ev.session_key = "nearmiss";
    ev.seq = seq;
    ev.ts = 100 + seq * 10;
    ++seq;
    ev.kind = kind;
    events.push_back(std::move(ev));
    return events.back();
  };
  add(EventKind::session_start);
  add(EventKind::llm_input);
  std::string a(20, 'x');
  std::string b = a;
  for (size_t i : {0u, 4u, 8u, 12u, 16u}) b[i] = 'y';  // 5 edits / 20 = 0.75
  REQUIRE(normalized_similarity(a, b) == doctest::Approx(0.75));
  for (const std::string& args : {a, b}) {
    add(EventKind::before_tool_call).tool_name = "read_file";
    events.back().args_text = args;
    add(EventKind::after_tool_call).result_text = "ok";
  }
  add(EventKind::llm_output).tokens = TokenUsage{10, 2, 0, 0};
  add(EventKind::session_end);
  CHECK(detect_redundancy(tree_from(events), default_compiler_config()).empty());
}

TEST_CASE("role classification over the example-shape session") {
  auto tree = tree_from(card_shape_session());
  // DERIVED oracle: re-derive expectations from the raw event order — no
  // errored tools anywhere, so: tool-call turns, then the last turn is a
  // final reply.
  std::vector<RoleHint> expected = {RoleHint::tool_call, RoleHint::tool_call,
                                    RoleHint::tool_call, RoleHint::tool_call,
                                    RoleHint::final_reply};
  std::vector<RoleHint> actual;
  tree.for_each_span([&](const Span& s) {
    if (s.kind == SpanKind::llm) actual.push_back(classify_role(s, tree));
  });
  CHECK(actual == expected);
}

TEST_CASE("role classification: error recovery and planning") {
  std::vector<TraceEvent> events;
  int64_t seq = 0;
  auto add = [&](EventKind kind) -> TraceEvent& {
    TraceEvent ev;
    ev.session_key = "roles";
    ev.seq = seq;
    ev.ts = 100 + seq * 10;
    ++seq;
    ev.kind = kind;
    events.push_back(std::move(ev));
    return events.back();
  };
  add(EventKind::session_start);
  // turn 0: no tools (planning)
  add(EventKind::llm_input);
  add(EventKind::llm_output).tokens = TokenUsage{10, 1, 0, 0};
  // turn 1: errored tool
  add(EventKind::llm_input);
  add(EventKind::before_tool_call).tool_name = "write_file";
  events.back().args_text = "write_file('out')";
  auto& after = add(EventKind::after_tool_call);
  after.tool_error = true;
  after.result_text = "disk full";
  add(EventKind::llm_output).tokens = TokenUsage{10, 1, 0, 0};
  // turn 2: recovers (no tools of its own)
  add(EventKind::llm_input);
  add(EventKind::llm_output).tokens = TokenUsage{10, 1, 0, 0};
  // turn 3: final
  add(EventKind::llm_input);
  add(EventKind::llm_output).tokens = TokenUsage{10, 1, 0, 0};
  add(EventKind::session_end);

  auto tree = tree_from(events);
  std::vector<RoleHint> actual;
  tree.for_each_span([&](const Span& s) {
    if (s.kind == SpanKind::llm) actual.push_back(classify_role(s, tree));
  });
  REQUIRE(actual.size() == 4);
  CHECK(actual[0] == RoleHint::planning);
  CHECK(actual[1] == RoleHint::tool_call);
  CHECK(actual[2] == RoleHint::error_recovery);
  CHECK(actual[3] == RoleHint::final_reply);
}

TEST_CASE("role classification: middle turn without tools is intermediate") {
  std::vector<TraceEvent> events;
  int64_t seq = 0;
  auto add = [&](EventKind kind) -> TraceEvent& {
    TraceEvent ev;
    ev.session_key = "mid";
    ev.seq = seq;
    ev.ts = 100 + seq * 10;
    ++seq;
    ev.kind = kind;
    events.push_back(std::move(ev));
    return events.back();
  };
  add(EventKind::session_start);
  for (int turn = 0; turn < 3; ++turn) {
    add(EventKind::llm_input);
    add(EventKind::llm_output).tokens = TokenUsage{10, 1, 0, 0};
  }
  add(EventKind::session_end);
  auto tree = tree_from(events);
  std::vector<RoleHint> actual;
  tree.for_each_span([&](const Span& s) {
    if (s.kind == SpanKind::llm) actual.push_back(classify_role(s, tree));
  });
  CHECK(actual == std::vector<RoleHint>{RoleHint::planning,
                                        RoleHint::intermediate,
                                        RoleHint::final_reply});
}

TEST_CASE("failure detection with default patterns and repair linking") {
  CompilerConfig config = default_compiler_config();

  SUBCASE("traceback text flags a failed step") {
    std::vector<TraceEvent> events;
    int64_t seq = 0;
    auto add = [&](EventKind kind) -> TraceEvent& {
      TraceEvent ev;
      ev.session_key = "fail1";
      ev.seq = seq;
      ev.ts = 10 * ++seq;
      ev.kind = kind;
      events.push_back(std::move(ev));
      return events.back();
    };
    add(EventKind::session_start);
    add(EventKind::llm_input);
    add(EventKind::before_tool_call).tool_name = "run_py";
    events.back().args_text = "run_py('x')";
    add(EventKind::after_tool_call).result_text =
        "Traceback (most recent call last)";
    add(EventKind::llm_output).tokens = TokenUsage{5, 1, 0, 0};
    add(EventKind::session_end);
    auto failures = detect_failures(tree_from(events), config);
    REQUIRE(failures.size() == 1);
    CHECK_FALSE(failures[0].repaired);
    CHECK(failures[0].tool == "run_py");
  }

  SUBCASE("failed write followed by identical ok write is repaired") {
    Rng rng(2);
    SessionSpec spec;
    spec.key = "fail2";
    spec.turns = 4;
    spec.tools_per_turn = 1;
    spec.plant_failure = true;
    auto events = synth_session(spec, rng);
    auto tree = tree_from(events);
    auto failures = detect_failures(tree, config);
    REQUIRE(failures.size() == 1);
    CHECK(failures[0].repaired);
    CHECK_FALSE(failures[0].repaired_by.empty());
    // Oracle: scan ordered tool pairs exhaustively.
    const Span* failed = tree.find_span(failures[0].span_id);
    const Span* repair = tree.find_span(failures[0].repaired_by);
    REQUIRE(failed);
    REQUIRE(repair);
    CHECK(repair->open_ordinal > failed->open_ordinal);
    CHECK(repair->tool->tool_name == failed->tool->tool_name);
    CHECK_FALSE(repair->tool->error);
    CHECK(normalized_similarity(repair->tool->args_text,
                                failed->tool->args_text) >= 0.8);
  }

  SUBCASE("clean session yields an empty list") {
    auto failures = detect_failures(tree_from(card_shape_session()), config);
    CHECK(failures.empty());
  }

  SUBCASE("invalid configured regex fails at load, not detection") {
    CompilerConfig bad = config;
    bad.failure_patterns.push_back("([unclosed");
    CHECK_THROWS_AS(compile_failure_patterns(bad.failure_patterns),
                    ConfigError);
  }
}

TEST_CASE("subagent usage fractions") {
  CHECK(subagent_usage("alpha beta gamma", "alpha beta gamma") == 1.0);
  CHECK(subagent_usage("alpha beta", "delta epsilon") == 0.0);
  CHECK(subagent_usage("", "anything at all") == 0.0);
}

TEST_CASE("compile_card assembles the example-shape card") {
  auto tree = tree_from(card_shape_session());
  TraceCard card = compile_card(tree, default_pricing(),
                                default_compiler_config());
  CHECK(card.session_id == "sb-task-shape");
  CHECK(card.model == "openai-codex/gpt-5.4");
  CHECK(card.outcome == "success");
  CHECK(card.total_tokens.input == 600 + 4200 + 700 + 3800 + 2100);

  REQUIRE(card.top_cost_spans.size() == 5);
  // Sorted by cost descending; the two reads outrank everything else.
  CHECK(card.top_cost_spans[0].cost_usd >= card.top_cost_spans[1].cost_usd);
  CHECK(card.top_cost_spans[0].kind == SpanKind::llm);
  CHECK(card.top_cost_spans[0].role_hint == RoleHint::tool_call);
  CHECK(card.top_cost_spans[0].args_sample == synth_args_base());

  REQUIRE(card.redundant_tool_calls.size() == 1);
  CHECK(card.redundant_tool_calls[0].cluster ==
        std::vector<std::string>{"span-3", "span-7"});
  CHECK(card.sub_agents.empty());
  CHECK(card.failed_or_repaired.empty());
}

TEST_CASE("compile_card: minimal one-span session") {
  std::vector<TraceEvent> events;
  int64_t seq = 0;
  auto add = [&](EventKind kind) -> TraceEvent& {
    TraceEvent ev;
    ev.session_key = "mini";
    ev.seq = seq;
    ev.ts = 10 * ++seq;
    ev.kind = kind;
    events.push_back(std::move(ev));
    return events.back();
  };
  add(EventKind::session_start).model = "openai-codex/gpt-5.4";
  add(EventKind::llm_input);
  add(EventKind::llm_output).tokens = TokenUsage{100, 10, 0, 0};
  add(EventKind::session_end);
  TraceCard card = compile_card(tree_from(events), default_pricing(),
                                default_compiler_config());
  CHECK(card.top_cost_spans.size() == 1);
  CHECK(card.redundant_tool_calls.empty());
  CHECK(card.failed_or_repaired.empty());
  CHECK(card.outcome == "unknown");
}

TEST_CASE("top-k correctness: omitted spans never outrank included ones") {
  auto sessions = synth_random_sessions(31, 10);
  for (const auto& events : sessions) {
    auto tree = tree_from(events);
    SessionCost cost = session_cost(tree, default_pricing());
    TraceCard card =
        compile_card(tree, default_pricing(), default_compiler_config());
    if (card.top_cost_spans.empty()) continue;
    Money min_included = card.top_cost_spans.back().cost_usd;
    std::set<std::string> included;
    for (const auto& s : card.top_cost_spans) included.insert(s.span_id);
    tree.for_each_span([&](const Span& s) {
      if (included.count(s.span_id)) return;
      auto it = cost.per_span.find(s.span_id);
      Money c = it == cost.per_span.end() ? Money{} : it->second.total_usd;
      CHECK(c <= min_included);
    });
  }
}

TEST_CASE("sub-agent costs stay out of the parent total (double entry)") {
  std::vector<TraceEvent> parent_events;
  int64_t seq = 0;
  auto add = [&](EventKind kind) -> TraceEvent& {
    TraceEvent ev;
    ev.session_key = "parent";
    ev.seq = seq;
    ev.ts = 10 * ++seq;
    ev.kind = kind;
    parent_events.push_back(std::move(ev));
    return parent_events.back();
  };
  add(EventKind::session_start).model = "openai-codex/gpt-5.4";
  add(EventKind::llm_input);
  add(EventKind::subagent_spawning).child_session_key = "kid";
  add(EventKind::subagent_ended).child_session_key = "kid";
  auto& out = add(EventKind::llm_output);
  out.tokens = TokenUsage{1000, 100, 0, 0};
  out.text = "totals follow the summary from the helper";
  add(EventKind::session_end);

  std::vector<TraceEvent> child_events;
  seq = 0;
  auto addc = [&](EventKind kind) -> TraceEvent& {
    TraceEvent ev;
    ev.session_key = "kid";
    ev.seq = seq;
    ev.ts = 10 * ++seq;
    ev.kind = kind;
    child_events.push_back(std::move(ev));
    return child_events.back();
  };
  addc(EventKind::session_start).model = "openai-codex/gpt-5.4";
  addc(EventKind::llm_input);
  auto& cout_ = addc(EventKind::llm_output);
  cout_.tokens = TokenUsage{25000, 0, 0, 0};  // $0.05 at the default rate
  cout_.text = "summary from the helper";
  addc(EventKind::session_end);

  auto parent_tree = tree_from(parent_events);
  auto child_tree = tree_from(child_events);
  std::map<std::string, const SessionTree*> kids{{"kid", &child_tree}};
  TraceCard card = compile_card(parent_tree, default_pricing(),
                                default_compiler_config(), kids);

  Money parent_only = span_cost(TokenUsage{1000, 100, 0, 0},
                                default_pricing().lookup(card.model))
                          .total_usd;
  CHECK(card.total_cost_usd == parent_only);
  REQUIRE(card.sub_agents.size() == 1);
  CHECK(card.sub_agents[0].total_cost_usd == Money::parse("0.05"));
  CHECK(card.sub_agents[0].output_used_in_final > 0.0);

  // Double-entry audit: every span exactly once across the call graph.
  Money audit = session_cost(parent_tree, default_pricing()).total +
                session_cost(child_tree, default_pricing()).total;
  CHECK(audit == card.total_cost_usd + card.sub_agents[0].total_cost_usd);
}

TEST_CASE("seeded audit corpus: planted clusters found, nothing else") {
  auto sessions = synth_redundancy_corpus(0);
  REQUIRE(sessions.size() == 10);
  int flagged = 0;
  for (size_t i = 0; i < sessions.size(); ++i) {
    auto tree = tree_from(sessions[i]);
    auto clusters = detect_redundancy(tree, default_compiler_config());
    bool planted = i < 5;
    if (planted) {
      REQUIRE_MESSAGE(clusters.size() == 1, "session " << i);
      CHECK(clusters[0].tool == "read_file");
      CHECK(clusters[0].similarity >= 0.8);
      ++flagged;
    } else {
      // The near-miss pair in session 9 sits below threshold by design.
      CHECK_MESSAGE(clusters.empty(), "session " << i);
    }
  }
  CHECK(flagged == 5);
}

TEST_CASE("args samples truncate at 120 chars with a marker") {
  std::string longargs(300, 'a');
  CHECK(truncate_with_marker(longargs, 120).size() == 120);
  CHECK(truncate_with_marker(longargs, 120).substr(117) == "...");
  CHECK(truncate_with_marker("short", 120) == "short");
}

TEST_CASE("strip_costs removes cost fields and keeps tokens") {
  auto tree = tree_from(card_shape_session());
  TraceCard card =
      compile_card(tree, default_pricing(), default_compiler_config());
  TraceCard stripped = strip_costs(card);
  CHECK_FALSE(stripped.has_costs);
  CHECK(stripped.total_tokens == card.total_tokens);
  std::string yaml = emit_yaml(stripped);
  CHECK(yaml.find("total_cost_usd") == std::string::npos);
  CHECK(yaml.find("cost_usd") == std::string::npos);
  CHECK(yaml.find("total_tokens") != std::string::npos);
}
