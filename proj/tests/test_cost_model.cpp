#include "clawtrace/cost.hpp"

#include <algorithm>

#include "doctest.h"

#include "clawtrace/errors.hpp"
#include "clawtrace/synth.hpp"

using namespace clawtrace;

namespace {

// Independent oracle: the four-term formula evaluated in plain double
// arithmetic from per-million rates.
double four_term_usd(const TokenUsage& t, double r_in, double r_out,
                     double r_cr, double r_cw) {
  return (r_in * t.input + r_out * t.output + r_cr * t.cache_read +
          r_cw * t.cache_write) /
         1e6;
}

ModelRates gpt54() { return default_pricing().lookup("openai-codex/gpt-5.4"); }

}  // namespace

TEST_CASE("zero tokens cost zero") {
  CHECK(span_cost(TokenUsage{}, gpt54()).total_usd == Money{});
}

TEST_CASE("one million input tokens at the default rate costs $2.00") {
  TokenUsage t{1'000'000, 0, 0, 0};
  CHECK(span_cost(t, gpt54()).total_usd == Money::parse("2.00"));
}

TEST_CASE("example-card token totals evaluate to the oracle value") {
  // Four-term oracle over {12840, 3210, 8450, 1200} at 2/8/0.5/2 per M:
  // 0.025680 + 0.025680 + 0.004225 + 0.002400 = 0.057985.
  TokenUsage t{12840, 3210, 8450, 1200};
  double oracle = four_term_usd(t, 2.0, 8.0, 0.5, 2.0);
  CHECK(oracle == doctest::Approx(0.057985).epsilon(1e-12));
  CostBreakdown c = span_cost(t, gpt54());
  CHECK(c.total_usd == Money::parse("0.057985"));
  CHECK(c.total_usd.usd() == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(c.input_usd == Money::parse("0.025680"));
  CHECK(c.cache_read_usd == Money::parse("0.004225"));
}

TEST_CASE("breakdown components always sum to the total") {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    TokenUsage t{static_cast<int64_t>(rng.next(100000)),
                 static_cast<int64_t>(rng.next(100000)),
                 static_cast<int64_t>(rng.next(100000)),
                 static_cast<int64_t>(rng.next(100000))};
    CostBreakdown c = span_cost(t, gpt54());
    CHECK(c.total_usd ==
          c.input_usd + c.output_usd + c.cache_read_usd + c.cache_write_usd);
    CHECK(c.total_usd.usd() ==
          doctest::Approx(four_term_usd(t, 2, 8, 0.5, 2)).epsilon(1e-9));
  }
}

TEST_CASE("linearity and monotonicity") {
  TokenUsage t{123, 45, 67, 8};
  CostBreakdown one = span_cost(t, gpt54());
  TokenUsage t7{t.input * 7, t.output * 7, t.cache_read * 7, t.cache_write * 7};
  CostBreakdown seven = span_cost(t7, gpt54());
  CHECK(seven.total_usd == one.total_usd * 7);
  CHECK(seven.input_usd == one.input_usd * 7);

  TokenUsage more = t;
  more.cache_read += 1;
  CHECK(span_cost(more, gpt54()).total_usd > one.total_usd);
}

TEST_CASE("naive comparator reduces to the exact formula without cache reads") {
  TokenUsage t{5000, 1200, 0, 300};
  CHECK(naive_cost(t, gpt54()) == span_cost(t, gpt54()).total_usd);
}

TEST_CASE("overstatement factor matches the algebraic oracle") {
  // cacheRead equal to fresh input, cache rate a quarter of fresh:
  // (i+c)*r_in / (i*r_in + c*r_cr) = 2 / 1.25 = 1.6 exactly.
  TokenUsage t{10000, 0, 10000, 0};
  double factor =
      naive_cost(t, gpt54()).usd() / span_cost(t, gpt54()).total_usd.usd();
  CHECK(factor == doctest::Approx(1.6).epsilon(1e-12));

  // 30-50% cache share at a 10:1 rate ratio, reported not asserted exact.
  ModelRates tenth{Money::parse("2.00"), Money::parse("8.00"),
                   Money::parse("0.20"), Money::parse("2.00")};
  for (double share : {0.3, 0.4, 0.5}) {
    int64_t total_input = 100000;
    auto cache = static_cast<int64_t>(share * total_input);
    TokenUsage u{total_input - cache, 0, cache, 0};
    double naive = naive_cost(u, tenth).usd();
    double exact = span_cost(u, tenth).total_usd.usd();
    double oracle =
        (static_cast<double>(u.input + u.cache_read) * 2.0) /
        (static_cast<double>(u.input) * 2.0 + static_cast<double>(u.cache_read) * 0.2);
    CHECK(naive / exact == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(naive / exact > 1.0);
  }
}

TEST_CASE("session cost sums spans and aggregates tokens") {
  PricingTable pricing = default_pricing();
  Rng rng(23);
  SessionSpec spec;
  spec.key = "cost-sess";
  spec.turns = 4;
  auto events = synth_session(spec, rng);
  SessionLog log;
  log.session_key = spec.key;
  log.events = events;
  SessionTree tree = build_tree(log);

  SessionCost cost = session_cost(tree, pricing);
  Money manual;
  TokenUsage tokens;
  tree.for_each_span([&](const Span& s) {
    if (s.kind != SpanKind::llm) return;
    manual += span_cost(s.tokens, gpt54()).total_usd;
    tokens += s.tokens;
  });
  CHECK(cost.total == manual);
  CHECK(cost.total_tokens == tokens);
  CHECK(cost.per_span.size() == 4);
}

TEST_CASE("llm spans summing to the example-card totals aggregate exactly") {
  SessionLog log;
  log.session_key = "agg";
  TraceEvent start;
  start.session_key = "agg";
  start.seq = 0;
  start.ts = 0;
  start.kind = EventKind::session_start;
  start.model = "openai-codex/gpt-5.4";
  log.events.push_back(start);
  TokenUsage parts[2] = {{6840, 1210, 4450, 800}, {6000, 2000, 4000, 400}};
  int64_t seq = 1;
  for (const auto& part : parts) {
    TraceEvent in;
    in.session_key = "agg";
    in.seq = seq++;
    in.ts = seq * 10;
    in.kind = EventKind::llm_input;
    log.events.push_back(in);
    TraceEvent out;
    out.session_key = "agg";
    out.seq = seq++;
    out.ts = seq * 10;
    out.kind = EventKind::llm_output;
    out.tokens = part;
    log.events.push_back(out);
  }
  TraceEvent end;
  end.session_key = "agg";
  end.seq = seq++;
  end.ts = seq * 10;
  end.kind = EventKind::session_end;
  log.events.push_back(end);

  SessionCost cost = session_cost(build_tree(log), default_pricing());
  CHECK(cost.total_tokens == TokenUsage{12840, 3210, 8450, 1200});
  CHECK(cost.total == Money::parse("0.057985"));
}

TEST_CASE("unknown model is an explicit error") {
  PricingTable pricing = default_pricing();
  CHECK_THROWS_AS(pricing.lookup("mystery-model"), UnknownModelError);
}

TEST_CASE("pricing table parses from json and rejects bad rates") {
  auto table = PricingTable::from_json(R"({
    "schema_version": "1",
    "models": {"m1": {"input": "1.25", "output": "5",
                       "cacheRead": "0.125", "cacheWrite": "1.25"}}
  })");
  CHECK(table.lookup("m1").cache_read == Money::parse("0.125"));
  CHECK_THROWS_AS(PricingTable::from_json("[]"), ConfigError);
  CHECK_THROWS_AS(PricingTable::from_json(R"({"models":{"m":{"input":"x",
    "output":"1","cacheRead":"1","cacheWrite":"1"}}})"),
                  ConfigError);
}

TEST_CASE("span cost ranking is a deterministic total order") {
  // Ties broken by span_id lexicographic order.
  struct Entry {
    std::string id;
    Money cost;
  };
  std::vector<Entry> entries = {{"span-b", Money::parse("0.02")},
                                {"span-a", Money::parse("0.02")},
                                {"span-c", Money::parse("0.05")}};
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.id < b.id;
  });
  CHECK(entries[0].id == "span-c");
  CHECK(entries[1].id == "span-a");
  CHECK(entries[2].id == "span-b");
}
