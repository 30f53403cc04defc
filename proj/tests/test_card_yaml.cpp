#include "clawtrace/card_yaml.hpp"

#include <fstream>
#include <sstream>

#include "doctest.h"

#include "clawtrace/errors.hpp"
#include "clawtrace/synth.hpp"

using namespace clawtrace;

namespace {

TraceCard compile_session(const std::vector<TraceEvent>& events) {
  SessionLog log;
  log.session_key = events.front().session_key;
  log.events = events;
  return compile_card(build_tree(log), default_pricing(),
                      default_compiler_config());
}

std::string read_fixture(const char* name) {
  std::ifstream in(std::string(FIXTURES_DIR) + "/" + name);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("emit is deterministic and fixed-order") {
  auto sessions = synth_random_sessions(41, 8);
  for (const auto& events : sessions) {
    TraceCard card = compile_session(events);
    std::string a = emit_yaml(card);
    std::string b = emit_yaml(card);
    CHECK(a == b);
    CHECK(a.rfind("session_id:", 0) == 0);
    CHECK(a.find("model:") < a.find("total_cost_usd:"));
    CHECK(a.find("total_cost_usd:") < a.find("total_tokens:"));
    CHECK(a.find("outcome:") < a.find("top_cost_spans:"));
    CHECK(a.find("redundant_tool_calls:") < a.find("sub_agents:"));
    CHECK(a.find("sub_agents:") < a.find("failed_or_repaired:"));
  }
}

TEST_CASE("parse(emit(card)) round-trips randomized cards") {
  auto sessions = synth_random_sessions(43, 20);
  for (const auto& events : sessions) {
    TraceCard card = compile_session(events);
    TraceCard back = parse_yaml(emit_yaml(card));
    CHECK(back == card);
  }
}

TEST_CASE("the example card text parses and re-emits semantically unchanged") {
  std::string text = read_fixture("example_card.yaml");
  TraceCard card = parse_yaml(text);

  CHECK(card.session_id == "sb-task-47484");
  CHECK(card.model == "openai-codex/gpt-5.4");
  CHECK(card.total_cost_usd == Money::parse("0.068"));
  CHECK(card.total_tokens.input == 12840);
  CHECK(card.total_tokens.output == 3210);
  CHECK(card.total_tokens.cache_read == 8450);
  CHECK(card.total_tokens.cache_write == 1200);
  CHECK(card.outcome == "success");
  REQUIRE(card.top_cost_spans.size() == 3);
  CHECK(card.top_cost_spans[0].role_hint == RoleHint::tool_call);
  CHECK(card.top_cost_spans[0].cost_usd == Money::parse("0.021"));
  CHECK(card.top_cost_spans[0].tokens_in == 4200);
  CHECK(card.top_cost_spans[0].args_sample == "read_file('input.xlsx')");
  CHECK(card.top_cost_spans[2].role_hint == RoleHint::final_reply);
  REQUIRE(card.redundant_tool_calls.size() == 1);
  CHECK(card.redundant_tool_calls[0].cluster ==
        std::vector<std::string>{"span-3", "span-7"});
  CHECK(card.redundant_tool_calls[0].similarity == 0.94);
  CHECK(card.sub_agents.empty());
  CHECK(card.failed_or_repaired.empty());

  TraceCard again = parse_yaml(emit_yaml(card));
  CHECK(again == card);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_yaml("session_id: \"x\"\nmodel: \"m\"\ntotal_tokens:\n  input: ??\n");
    FAIL("expected YamlError");
  } catch (const YamlError& e) {
    CHECK(e.line == 4);
    CHECK(e.col > 0);
  }
  CHECK_THROWS_AS(parse_yaml(""), YamlError);
  CHECK_THROWS_AS(parse_yaml("model: \"m\"\n"), YamlError);  // no session_id
  CHECK_THROWS_AS(parse_yaml("session_id: \"unterminated\nmodel: \"m\"\n"),
                  YamlError);
}

TEST_CASE("format_double renders shortest round-trip form") {
  CHECK(format_double(0.94) == "0.94");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.1176) == "0.1176");
}

TEST_CASE("mutated card texts either parse or raise YamlError, never crash") {
  auto sessions = synth_random_sessions(47, 4);
  Rng rng(48);
  int parsed = 0, rejected = 0;
  for (const auto& events : sessions) {
    std::string base = emit_yaml(compile_session(events));
    for (int round = 0; round < 250; ++round) {
      std::string text = base;
      size_t edits = 1 + rng.next(4);
      for (size_t e = 0; e < edits; ++e) {
        size_t at = rng.next(text.size());
        switch (rng.next(3)) {
          case 0: text[at] = static_cast<char>(32 + rng.next(95)); break;
          case 1: text.erase(at, 1 + rng.next(3)); break;
          default: text.insert(at, 1, static_cast<char>(32 + rng.next(95)));
        }
        if (text.empty()) text = "x";
      }
      try {
        parse_yaml(text);
        ++parsed;
      } catch (const YamlError&) {
        ++rejected;
      }
    }
  }
  CHECK(parsed + rejected == 1000);
  CHECK(rejected > 0);
}

TEST_CASE("escaped strings survive emit and parse") {
  TraceCard card;
  card.session_id = "quote\"and\\slash";
  card.model = "m";
  card.outcome = "unknown";
  FailedStep step;
  step.span_id = "span-0";
  step.tool = "sh";
  step.error_excerpt = "line one\nline\ttwo";
  card.failed_or_repaired.push_back(step);
  TraceCard back = parse_yaml(emit_yaml(card));
  CHECK(back == card);
}
