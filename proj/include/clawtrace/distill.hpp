#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "clawtrace/tracecard.hpp"

namespace clawtrace {

enum class PatchAction { preserve, prune, repair };
const char* to_string(PatchAction action);

enum class Confidence { high, medium, low };
const char* to_string(Confidence confidence);

// Seven-code failure taxonomy used to route repair rules.
enum class TaxonomyCode { T1, T2, T3, T4, T5, T6, T7 };
const char* to_string(TaxonomyCode code);
const char* taxonomy_description(TaxonomyCode code);

// Machine-checkable waste descriptor attached to prune patches so learned
// rules can be matched against baseline cards later.
struct WastePattern {
  std::string tool;                       // exact tool name, empty = any
  std::string args_contains;              // '|'-separated substring alternation
  bool requires_redundant_cluster = false;
  bool operator==(const WastePattern&) const = default;
};

struct Patch {
  std::string id;  // "<trajectory>/<action>"
  PatchAction action = PatchAction::preserve;
  std::string rule;
  std::string source_trajectory;
  std::string target_span;              // prune
  std::string counterfactual;           // prune
  std::optional<TaxonomyCode> failure_type;  // repair
  std::string evidence;                 // repair
  Confidence confidence = Confidence::medium;
  std::optional<WastePattern> waste;    // prune
  bool operator==(const Patch&) const = default;
};

// Returns empty when the patch satisfies its action-typing invariants,
// else the reason it must be filtered.
std::string patch_invariant_error(const Patch& patch);

enum class SkillSection { trigger, workflow, stop_rules, artifact_checklist,
                          cost_control };
const char* section_heading(SkillSection section);

struct SkillRule {
  std::string text;
  std::vector<std::string> provenance;  // contributing patch ids
  bool operator==(const SkillRule&) const = default;
};

// Five named sections, always all present; rules carry provenance.
struct SkillDocument {
  std::vector<SkillRule> sections[5];
  std::vector<SkillRule>& at(SkillSection s) {
    return sections[static_cast<size_t>(s)];
  }
  const std::vector<SkillRule>& at(SkillSection s) const {
    return sections[static_cast<size_t>(s)];
  }
};

std::string render_markdown(const SkillDocument& doc);
std::string skill_to_yaml(const SkillDocument& doc);
std::string patches_to_yaml(const std::vector<Patch>& patches);

// ceil(code points / 4): deterministic tokenizer-independent measure.
size_t token_measure(const std::string& text);

// ---------------------------------------------------------------------------
// analysts

struct AnalystInput {
  TraceCard tracecard;
  std::string outcome;  // success | partial | fail
  const SkillDocument* current_skill = nullptr;
  bool cost_visible = true;
};

class SuccessAnalyst {
 public:
  virtual ~SuccessAnalyst() = default;
  // Up to two patches: one preserve, optionally one prune.
  virtual std::vector<Patch> analyze(const AnalystInput& input) = 0;
};

// Deterministic template analyst: preserve rule from the card's role_hint
// sequence; prune patch against the costliest clustered call when the card
// shows redundancy and cost is visible.
class MockSuccessAnalyst : public SuccessAnalyst {
 public:
  std::vector<Patch> analyze(const AnalystInput& input) override;
};

struct Mismatch {
  std::string rubric_item;
  std::string description;
};

// Ground-truth access available only during offline repair analysis.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::vector<Mismatch> inspect_mismatches() = 0;
  virtual std::string read_gold_snippet(const std::string& range) = 0;
};

class FixtureOracle : public Oracle {
 public:
  explicit FixtureOracle(std::vector<Mismatch> mismatches,
                         std::map<std::string, std::string> gold = {})
      : mismatches_(std::move(mismatches)), gold_(std::move(gold)) {}
  std::vector<Mismatch> inspect_mismatches() override { return mismatches_; }
  std::string read_gold_snippet(const std::string& range) override {
    auto it = gold_.find(range);
    return it == gold_.end() ? std::string() : it->second;
  }

 private:
  std::vector<Mismatch> mismatches_;
  std::map<std::string, std::string> gold_;
};

struct OracleBudget {
  int remaining = 3;
};

// Budget-enforcing proxy handed to error analysts. Lookups past the budget
// are refused (nullopt), never forwarded; emitting the final patch is free.
class BudgetedOracle {
 public:
  BudgetedOracle(Oracle& inner, OracleBudget& budget)
      : inner_(inner), budget_(budget) {}
  std::optional<std::vector<Mismatch>> inspect_mismatches();
  std::optional<std::string> read_gold_snippet(const std::string& range);
  bool refused() const { return refused_; }
  bool oracle_failed() const { return failed_; }

 private:
  Oracle& inner_;
  OracleBudget& budget_;
  bool refused_ = false;
  bool failed_ = false;
};

class ErrorAnalyst {
 public:
  virtual ~ErrorAnalyst() = default;
  virtual Patch analyze(const AnalystInput& input, BudgetedOracle& oracle) = 0;
};

// One inspect_mismatches call; keyword-maps the first mismatch to a
// taxonomy code and emits a templated repair grounded in it.
class MockErrorAnalyst : public ErrorAnalyst {
 public:
  Patch analyze(const AnalystInput& input, BudgetedOracle& oracle) override;
};

// Runs the analyst under a fresh 3-lookup budget. A refused lookup or an
// oracle failure forces the returned patch to low confidence; an invalid
// patch is replaced by a synthesized low-confidence repair.
Patch run_error_analyst(ErrorAnalyst& analyst, const AnalystInput& input,
                        Oracle& oracle);

std::optional<TaxonomyCode> map_mismatch_to_taxonomy(const Mismatch& mismatch);

// ---------------------------------------------------------------------------
// admission, merge, post-checks

struct AdmitConfig {
  bool require_counterfactual = true;  // condition (b); disabled under no_cf
  size_t counterfactual_min_chars = 20;
};

struct PruneDecision {
  bool accepted = false;
  char failed_condition = 0;  // 'a' | 'b' | 'c'
  std::string reason;
};

// (a) target named in top_cost_spans or a redundant cluster,
// (b) counterfactual of at least 20 chars, (c) no hard-cap phrasing.
PruneDecision admit_prune(const Patch& patch, const TraceCard& card,
                          const AdmitConfig& config = {});

struct MergeConfig {
  std::string task_family;  // Trigger section content
  std::vector<std::string> denylist;
  size_t token_ceiling = 1200;
  double dedup_similarity = 0.9;
  double conflict_similarity = 0.6;
};

// Priority fold: evidenced repairs, admitted prunes, low-confidence repairs,
// multi-trajectory preserves; singleton preserves dropped; conflicts resolved
// repair > prune > preserve. Throws PostCheckFailure on violations.
SkillDocument merge(std::vector<Patch> patches, const MergeConfig& config);

// Violations list; empty means pass.
std::vector<std::string> post_check(const SkillDocument& doc,
                                    const std::vector<std::string>& denylist,
                                    size_t token_ceiling = 1200);

// True when the baseline card exhibits the prune rule's waste pattern.
bool prune_rule_matches(const Patch& rule, const TraceCard& baseline_card);

// ---------------------------------------------------------------------------
// pipeline

// Deterministic oracle fixture derived from the card: failed sessions report
// a missing deliverable, partial ones a placeholder or formatting mismatch.
std::unique_ptr<Oracle> make_mock_oracle(const TraceCard& card,
                                         const std::string& outcome);

using OracleFactory =
    std::function<std::unique_ptr<Oracle>(const TraceCard&, const std::string&)>;

struct DistillationRun {
  SkillDocument document;
  std::vector<Patch> analyst_patches;  // everything the analysts emitted
  std::vector<Patch> merged_input;     // after admission and filters
  std::vector<std::string> diagnostics;
};

// Success cards go to the success analyst, partial/fail cards to the error
// analyst under a fresh oracle budget; prunes pass admit_prune against their
// own card before merge. cost_visible=false presents stripped cards;
// include_prunes=false discards prune patches ahead of the merge.
DistillationRun distill_cards(
    const std::vector<TraceCard>& cards,
    const std::map<std::string, std::string>& outcomes,
    bool cost_visible, bool include_prunes, const AdmitConfig& admit,
    SuccessAnalyst& success_analyst, ErrorAnalyst& error_analyst,
    const OracleFactory& oracle_factory, const MergeConfig& merge_config);

}  // namespace clawtrace
