#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clawtrace/distill.hpp"
#include "clawtrace/money.hpp"

namespace clawtrace {

// Per-task quality in [0,1], held as integer micro-units so the +-0.01
// dead band and the Q=0 / Q=1 regime boundaries are exact decimal
// comparisons, never float ones.
struct Quality {
  static constexpr int64_t kOne = 1'000'000;
  int64_t micro = 0;
  static Quality parse(std::string_view text);  // ConfigError
  double value() const { return static_cast<double>(micro) / kOne; }
  auto operator<=>(const Quality&) const = default;
};

enum class ConditionId { baseline, full, no_prune, no_cost_attr, no_cf };
const char* to_string(ConditionId id);
std::optional<ConditionId> condition_from_string(std::string_view name);

struct TaskOutcome {
  std::string task_id;
  ConditionId condition = ConditionId::baseline;
  Quality quality;
  Money cost_usd;
  std::string card_ref;  // optional TraceCard id
};

enum class PairClass { win, tie, regression };
const char* to_string(PairClass c);

enum class Regime { success, partial, fail };
const char* to_string(Regime r);
Regime regime_of(Quality baseline_quality);

struct PairedResult {
  std::string task_id;
  Quality baseline_q;
  Quality skill_q;
  double delta_q = 0.0;
  std::optional<double> delta_cost_fraction;  // unset when baseline cost is 0
  PairClass classification = PairClass::tie;
  bool catastrophic = false;  // skill Q = 0 while baseline Q > 0
  Regime regime = Regime::success;
};

// Regression iff q_s < q_b - 0.01; win iff q_s > q_b + 0.01; tie is the
// closed band between. Throws PairingError on mismatched task ids.
PairedResult classify_pair(const TaskOutcome& baseline,
                           const TaskOutcome& skill);

struct RegimeRow {
  Regime regime = Regime::success;
  int n = 0;
  int wins = 0;
  int ties = 0;
  int regressions = 0;
  int catastrophic = 0;
  std::optional<double> median_delta_cost;
};

struct SummaryReport {
  ConditionId skill_condition = ConditionId::full;
  int n = 0;
  int wins = 0;
  int ties = 0;
  int regressions = 0;
  int catastrophic = 0;
  double preservation_rate = 0.0;  // (ties + wins) / n
  double ties_only_rate = 0.0;     // secondary figure
  double regression_rate = 0.0;
  std::optional<double> median_delta_cost;
  std::vector<RegimeRow> regime_rows;  // success, partial, fail
  std::vector<PairedResult> pairs;
};

// Permutation-invariant; medians use the lower of two central elements.
SummaryReport summarize(std::vector<PairedResult> pairs);

// Condition semantics over distillation inputs (Table-2 style ablations).
struct DistillInputs {
  std::vector<TraceCard> cards;
  std::vector<Patch> patches;
  bool cost_visible = true;
  bool require_counterfactual = true;
  bool include_prunes = true;
  bool bypass = false;  // baseline: no distillation at all
};

DistillInputs apply_condition(std::vector<TraceCard> cards,
                              std::vector<Patch> patches, ConditionId cond);

struct PruneCoverage {
  double fraction = 0.0;  // matched / success-regime cards
  int matched = 0;
  int success_cards = 0;
  std::vector<std::string> matched_tasks;
};

// Fraction of success-outcome baseline cards matching at least one admitted
// prune rule via prune_rule_matches.
PruneCoverage prune_coverage(const std::vector<Patch>& rules,
                             const std::vector<TraceCard>& baseline_cards);

// Results file: header "task_id,condition,quality,cost_usd".
std::vector<TaskOutcome> load_results(const std::filesystem::path& path);
std::vector<TaskOutcome> parse_results(const std::string& text);

// Pairs baseline rows against skill-condition rows by task id.
std::vector<PairedResult> pair_outcomes(const std::vector<TaskOutcome>& rows,
                                        ConditionId baseline,
                                        ConditionId skill);

std::string report_markdown(const SummaryReport& report);
std::string report_json(const SummaryReport& report);

// "86.7%" style one-decimal rendering.
std::string format_percent(double fraction);

}  // namespace clawtrace
