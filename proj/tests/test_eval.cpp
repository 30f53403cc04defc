#include "clawtrace/eval.hpp"

#include <algorithm>

#include "doctest.h"

#include "clawtrace/errors.hpp"
#include "clawtrace/synth.hpp"

using namespace clawtrace;

namespace {

TaskOutcome outcome(const std::string& task, ConditionId cond, const char* q,
                    const char* cost) {
  TaskOutcome o;
  o.task_id = task;
  o.condition = cond;
  o.quality = Quality::parse(q);
  o.cost_usd = Money::parse(cost);
  return o;
}

}  // namespace

TEST_CASE("classification trichotomy with an exact dead band") {
  auto base = outcome("t", ConditionId::baseline, "1.0", "0.05");
  CHECK(classify_pair(base, outcome("t", ConditionId::full, "1.0", "0.06"))
            .classification == PairClass::tie);
  // Exactly at the band edge stays a tie: the band is closed.
  CHECK(classify_pair(base, outcome("t", ConditionId::full, "0.99", "0.06"))
            .classification == PairClass::tie);
  CHECK(classify_pair(base, outcome("t", ConditionId::full, "0.989999", "0.06"))
            .classification == PairClass::regression);

  auto partial = outcome("t", ConditionId::baseline, "0.5", "0.05");
  CHECK(classify_pair(partial, outcome("t", ConditionId::full, "0.51", "0.06"))
            .classification == PairClass::tie);
  CHECK(classify_pair(partial, outcome("t", ConditionId::full, "0.510001", "0.06"))
            .classification == PairClass::win);
}

TEST_CASE("published regression example: 1.0 to 0.667") {
  auto base = outcome("42034", ConditionId::baseline, "1.0", "0.05");
  auto skill = outcome("42034", ConditionId::full, "0.667", "0.06");
  auto pair = classify_pair(base, skill);
  CHECK(pair.classification == PairClass::regression);
  CHECK_FALSE(pair.catastrophic);
  CHECK(pair.regime == Regime::success);
}

TEST_CASE("recovery from zero is a win, not catastrophic") {
  auto base = outcome("488-29", ConditionId::baseline, "0", "0.021");
  auto skill = outcome("488-29", ConditionId::full, "1.0", "0.118");
  auto pair = classify_pair(base, skill);
  CHECK(pair.classification == PairClass::win);
  CHECK_FALSE(pair.catastrophic);
  CHECK(pair.regime == Regime::fail);
  REQUIRE(pair.delta_cost_fraction.has_value());
  CHECK(*pair.delta_cost_fraction ==
        doctest::Approx((0.118 - 0.021) / 0.021).epsilon(1e-9));
}

TEST_CASE("catastrophic flag and zero-cost baseline sentinel") {
  auto base = outcome("t", ConditionId::baseline, "1.0", "0");
  auto skill = outcome("t", ConditionId::no_prune, "0", "0");
  auto pair = classify_pair(base, skill);
  CHECK(pair.classification == PairClass::regression);
  CHECK(pair.catastrophic);
  CHECK_FALSE(pair.delta_cost_fraction.has_value());
}

TEST_CASE("mismatched task ids raise PairingError") {
  CHECK_THROWS_AS(classify_pair(outcome("a", ConditionId::baseline, "1", "1"),
                                outcome("b", ConditionId::full, "1", "1")),
                  PairingError);
}

TEST_CASE("regimes partition exactly at the decimal boundaries") {
  CHECK(regime_of(Quality::parse("1.0")) == Regime::success);
  CHECK(regime_of(Quality::parse("1")) == Regime::success);
  CHECK(regime_of(Quality::parse("0.999999")) == Regime::partial);
  CHECK(regime_of(Quality::parse("0.000001")) == Regime::partial);
  CHECK(regime_of(Quality::parse("0")) == Regime::fail);
  CHECK(regime_of(Quality::parse("0.0")) == Regime::fail);
}

TEST_CASE("single tie pair summarizes to full preservation") {
  auto pair = classify_pair(outcome("t", ConditionId::baseline, "1.0", "0.05"),
                            outcome("t", ConditionId::full, "1.0", "0.05"));
  auto report = summarize({pair});
  CHECK(report.preservation_rate == 1.0);
  CHECK(report.regressions == 0);
  CHECK(report.n == 1);
}

TEST_CASE("summarize is permutation invariant and uses the lower median") {
  std::vector<PairedResult> pairs;
  const char* costs_base[] = {"0.10", "0.10", "0.10", "0.10"};
  const char* costs_skill[] = {"0.11", "0.13", "0.17", "0.19"};
  for (int i = 0; i < 4; ++i) {
    pairs.push_back(classify_pair(
        outcome("t" + std::to_string(i), ConditionId::baseline, "1.0",
                costs_base[i]),
        outcome("t" + std::to_string(i), ConditionId::full, "1.0",
                costs_skill[i])));
  }
  auto report = summarize(pairs);
  // deltas 0.1, 0.3, 0.7, 0.9 -> lower median 0.3
  REQUIRE(report.median_delta_cost.has_value());
  CHECK(*report.median_delta_cost == doctest::Approx(0.3).epsilon(1e-9));
  std::reverse(pairs.begin(), pairs.end());
  auto reversed = summarize(pairs);
  CHECK(report_json(reversed) == report_json(report));
}

TEST_CASE("apply_condition implements the ablation table") {
  std::vector<TraceCard> cards(1);
  cards[0].session_id = "c";
  cards[0].model = "m";
  cards[0].total_cost_usd = Money::parse("0.07");
  cards[0].total_tokens = TokenUsage{10, 5, 2, 1};
  std::vector<Patch> patches;
  Patch prune;
  prune.action = PatchAction::prune;
  prune.rule = "Avoid repeats.";
  prune.target_span = "s";
  prune.counterfactual = "The repeated call carried no new content.";
  patches.push_back(prune);
  Patch preserve;
  preserve.action = PatchAction::preserve;
  preserve.rule = "Keep the verify step.";
  patches.push_back(preserve);

  SUBCASE("no_cost_attr strips cost fields, tokens intact") {
    auto inputs = apply_condition(cards, patches, ConditionId::no_cost_attr);
    CHECK_FALSE(inputs.cost_visible);
    CHECK_FALSE(inputs.cards[0].has_costs);
    CHECK(inputs.cards[0].total_tokens == cards[0].total_tokens);
  }
  SUBCASE("no_prune discards prune patches") {
    auto inputs = apply_condition(cards, patches, ConditionId::no_prune);
    REQUIRE(inputs.patches.size() == 1);
    CHECK(inputs.patches[0].action == PatchAction::preserve);
    CHECK_FALSE(inputs.include_prunes);
  }
  SUBCASE("no_cf disables the counterfactual gate only") {
    auto inputs = apply_condition(cards, patches, ConditionId::no_cf);
    CHECK_FALSE(inputs.require_counterfactual);
    CHECK(inputs.include_prunes);
    CHECK(inputs.cost_visible);
  }
  SUBCASE("baseline bypasses distillation") {
    CHECK(apply_condition(cards, patches, ConditionId::baseline).bypass);
  }
  SUBCASE("full keeps everything") {
    auto inputs = apply_condition(cards, patches, ConditionId::full);
    CHECK(inputs.cost_visible);
    CHECK(inputs.require_counterfactual);
    CHECK(inputs.patches.size() == 2);
  }
}

TEST_CASE("gate-failing prune: excluded under full, included under no_cf") {
  TraceCard card;
  card.session_id = "t";
  card.model = "m";
  CostSpanSummary top;
  top.span_id = "span-1";
  top.kind = SpanKind::llm;
  top.role_hint = RoleHint::tool_call;
  top.cost_usd = Money::parse("0.01");
  card.top_cost_spans.push_back(top);

  Patch p;
  p.action = PatchAction::prune;
  p.target_span = "span-1";
  p.rule = "Avoid the duplicate fetch.";
  p.counterfactual = "short";  // fails condition (b)

  AdmitConfig full;
  CHECK_FALSE(admit_prune(p, card, full).accepted);
  auto inputs = apply_condition({card}, {}, ConditionId::no_cf);
  AdmitConfig no_cf;
  no_cf.require_counterfactual = inputs.require_counterfactual;
  CHECK(admit_prune(p, card, no_cf).accepted);
}

TEST_CASE("prune coverage over baseline cards") {
  Patch rule;
  rule.action = PatchAction::prune;
  rule.rule = "Avoid re-reading files.";
  rule.target_span = "s";
  rule.counterfactual = "The repeat carried nothing new at all.";
  rule.waste = WastePattern{"read_file", "", true};

  std::vector<TraceCard> cards;
  for (int i = 0; i < 17; ++i) {
    TraceCard card;
    card.session_id = "t" + std::to_string(i);
    card.model = "m";
    card.outcome = "success";
    if (i < 2) {
      RedundantCluster c;
      c.cluster = {"a", "b"};
      c.tool = "read_file";
      c.similarity = 0.9;
      card.redundant_tool_calls.push_back(c);
    }
    cards.push_back(card);
  }
  // Non-success cards are out of scope for coverage.
  TraceCard failing;
  failing.session_id = "tf";
  failing.model = "m";
  failing.outcome = "fail";
  cards.push_back(failing);

  auto coverage = prune_coverage({rule}, cards);
  CHECK(coverage.success_cards == 17);
  CHECK(coverage.matched == 2);
  CHECK(coverage.fraction == doctest::Approx(2.0 / 17).epsilon(1e-9));
  CHECK(format_percent(coverage.fraction) == "11.8%");

  CHECK(prune_coverage({}, cards).fraction == 0.0);

  // Every card planted with a matching cluster saturates coverage, with an
  // exhaustive matcher sweep as the oracle.
  for (auto& card : cards) {
    card.outcome = "success";
    card.redundant_tool_calls.clear();
    RedundantCluster c;
    c.cluster = {"x", "y"};
    c.tool = "read_file";
    c.similarity = 0.85;
    card.redundant_tool_calls.push_back(c);
  }
  auto full = prune_coverage({rule}, cards);
  CHECK(full.fraction == 1.0);
  for (const auto& card : cards) CHECK(prune_rule_matches(rule, card));
}

TEST_CASE("results file parsing round-trips and validates") {
  std::string csv =
      "task_id,condition,quality,cost_usd\n"
      "sb-1,baseline,1.0,0.05\n"
      "sb-1,full,0.667,0.07\n";
  auto rows = parse_results(csv);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].condition == ConditionId::baseline);
  CHECK(rows[1].quality == Quality::parse("0.667"));
  CHECK_THROWS_AS(parse_results("no header\n"), ConfigError);
  CHECK_THROWS_AS(parse_results("task_id,condition,quality,cost_usd\nx,weird,1,1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_results("task_id,condition,quality,cost_usd\nx,full,2.0,1\n"),
                  ConfigError);
}

TEST_CASE("pairing joins baseline and skill rows by task id") {
  std::string csv =
      "task_id,condition,quality,cost_usd\n"
      "a,baseline,1.0,0.05\n"
      "b,baseline,0.5,0.04\n"
      "a,full,1.0,0.06\n"
      "b,full,1.0,0.05\n"
      "c,full,1.0,0.02\n";  // no baseline: skipped
  auto pairs = pair_outcomes(parse_results(csv), ConditionId::baseline,
                             ConditionId::full);
  REQUIRE(pairs.size() == 2);
  auto report = summarize(pairs);
  CHECK(report.wins == 1);
  CHECK(report.ties == 1);
}

TEST_CASE("markdown report carries the headline figures") {
  std::string csv =
      "task_id,condition,quality,cost_usd\n"
      "a,baseline,1.0,0.05\n"
      "a,no_prune,0,0.001\n";
  auto report = summarize(pair_outcomes(parse_results(csv),
                                        ConditionId::baseline,
                                        ConditionId::no_prune));
  report.skill_condition = ConditionId::no_prune;
  std::string md = report_markdown(report);
  CHECK(md.find("preservation rate") != std::string::npos);
  CHECK(md.find("0.0%") != std::string::npos);
  CHECK(md.find("catastrophic") != std::string::npos);
  CHECK(md.find("| success | 1 |") != std::string::npos);
}
