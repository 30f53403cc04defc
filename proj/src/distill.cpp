#include "clawtrace/distill.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "clawtrace/errors.hpp"
#include "clawtrace/similarity.hpp"

namespace clawtrace {

const char* to_string(PatchAction action) {
  switch (action) {
    case PatchAction::preserve: return "preserve";
    case PatchAction::prune: return "prune";
    case PatchAction::repair: return "repair";
  }
  return "?";
}

const char* to_string(Confidence confidence) {
  switch (confidence) {
    case Confidence::high: return "high";
    case Confidence::medium: return "medium";
    case Confidence::low: return "low";
  }
  return "?";
}

const char* to_string(TaxonomyCode code) {
  static const char* names[] = {"T1", "T2", "T3", "T4", "T5", "T6", "T7"};
  return names[static_cast<size_t>(code)];
}

const char* taxonomy_description(TaxonomyCode code) {
  static const char* descriptions[] = {
      "no deliverable",      "wrong content type", "formula not evaluated",
      "placeholder mismatch", "case/whitespace",    "logic error",
      "precision rounding"};
  return descriptions[static_cast<size_t>(code)];
}

std::string patch_invariant_error(const Patch& patch) {
  if (patch.rule.empty()) return "rule text is empty";
  switch (patch.action) {
    case PatchAction::prune:
      if (patch.target_span.empty()) return "prune patch without target_span";
      if (patch.counterfactual.empty())
        return "prune patch without counterfactual";
      break;
    case PatchAction::repair:
      if (patch.evidence.empty()) return "repair patch without evidence";
      break;
    case PatchAction::preserve:
      break;
  }
  return "";
}

const char* section_heading(SkillSection section) {
  static const char* headings[] = {"Trigger", "Workflow", "Stop rules",
                                   "Artifact checklist", "Cost control"};
  return headings[static_cast<size_t>(section)];
}

std::string render_markdown(const SkillDocument& doc) {
  std::ostringstream os;
  os << "# Skill\n";
  for (size_t i = 0; i < 5; ++i) {
    os << "\n## " << section_heading(static_cast<SkillSection>(i)) << "\n";
    for (const auto& rule : doc.sections[i]) os << "- " << rule.text << "\n";
  }
  return os.str();
}

size_t token_measure(const std::string& text) {
  size_t code_points = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++code_points;
  }
  return (code_points + 3) / 4;
}

namespace {

std::string yaml_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string skill_to_yaml(const SkillDocument& doc) {
  std::ostringstream os;
  os << "sections:\n";
  for (size_t i = 0; i < 5; ++i) {
    os << "  - heading: " << yaml_quote(section_heading(static_cast<SkillSection>(i)))
       << "\n";
    if (doc.sections[i].empty()) {
      os << "    rules: []\n";
      continue;
    }
    os << "    rules:\n";
    for (const auto& rule : doc.sections[i]) {
      os << "      - text: " << yaml_quote(rule.text) << "\n";
      os << "        provenance: [";
      for (size_t p = 0; p < rule.provenance.size(); ++p) {
        if (p) os << ", ";
        os << yaml_quote(rule.provenance[p]);
      }
      os << "]\n";
    }
  }
  return os.str();
}

std::string patches_to_yaml(const std::vector<Patch>& patches) {
  std::ostringstream os;
  if (patches.empty()) {
    os << "patches: []\n";
    return os.str();
  }
  os << "patches:\n";
  for (const auto& p : patches) {
    os << "  - id: " << yaml_quote(p.id) << "\n";
    os << "    action: " << to_string(p.action) << "\n";
    os << "    source_trajectory: " << yaml_quote(p.source_trajectory) << "\n";
    os << "    confidence: " << to_string(p.confidence) << "\n";
    os << "    rule: " << yaml_quote(p.rule) << "\n";
    if (!p.target_span.empty())
      os << "    target_span: " << yaml_quote(p.target_span) << "\n";
    if (!p.counterfactual.empty())
      os << "    counterfactual: " << yaml_quote(p.counterfactual) << "\n";
    if (p.waste) {
      os << "    waste: {tool: " << yaml_quote(p.waste->tool)
         << ", args: " << yaml_quote(p.waste->args_contains)
         << ", requires_cluster: "
         << (p.waste->requires_redundant_cluster ? "true" : "false") << "}\n";
    }
    if (p.failure_type)
      os << "    failure_type: " << to_string(*p.failure_type) << "\n";
    if (!p.evidence.empty())
      os << "    evidence: " << yaml_quote(p.evidence) << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// analysts

std::vector<Patch> MockSuccessAnalyst::analyze(const AnalystInput& input) {
  const TraceCard& card = input.tracecard;
  std::vector<Patch> patches;

  std::string roles;
  for (const auto& span : card.top_cost_spans) {
    if (!span.role_hint) continue;
    if (!roles.empty()) roles += " then ";
    roles += to_string(*span.role_hint);
  }
  Patch preserve;
  preserve.action = PatchAction::preserve;
  preserve.source_trajectory = card.session_id;
  preserve.id = card.session_id + "/preserve";
  preserve.confidence = Confidence::high;
  preserve.rule =
      roles.empty()
          ? "Keep the turn structure that produced the deliverable."
          : "Keep the " + roles +
                " turn structure that produced the deliverable.";
  patches.push_back(std::move(preserve));

  // The prune template cites the target's standing among the costed steps,
  // so it is only emitted when the analyst can see cost fields.
  if (input.cost_visible && card.has_costs &&
      !card.redundant_tool_calls.empty()) {
    const RedundantCluster& cluster = card.redundant_tool_calls.front();
    Patch prune;
    prune.action = PatchAction::prune;
    prune.source_trajectory = card.session_id;
    prune.id = card.session_id + "/prune";
    prune.confidence = Confidence::high;
    prune.target_span = cluster.cluster.back();
    prune.rule = "Avoid re-running " + cluster.tool +
                 " with near-identical arguments; reuse the first result "
                 "instead of repeating the call.";
    prune.counterfactual =
        "The " + cluster.tool + " call at " + prune.target_span +
        " repeats an earlier call in its cluster with at least 80% similar "
        "arguments; the first result already carried the content, so "
        "removing the repeat leaves the outcome unchanged.";
    prune.waste = WastePattern{cluster.tool, "", true};
    patches.push_back(std::move(prune));
  }
  return patches;
}

std::optional<std::vector<Mismatch>> BudgetedOracle::inspect_mismatches() {
  if (budget_.remaining <= 0) {
    refused_ = true;
    return std::nullopt;
  }
  --budget_.remaining;
  try {
    return inner_.inspect_mismatches();
  } catch (...) {
    failed_ = true;
    return std::nullopt;
  }
}

std::optional<std::string> BudgetedOracle::read_gold_snippet(
    const std::string& range) {
  if (budget_.remaining <= 0) {
    refused_ = true;
    return std::nullopt;
  }
  --budget_.remaining;
  try {
    return inner_.read_gold_snippet(range);
  } catch (...) {
    failed_ = true;
    return std::nullopt;
  }
}

std::optional<TaxonomyCode> map_mismatch_to_taxonomy(const Mismatch& mismatch) {
  std::string text = mismatch.rubric_item + " " + mismatch.description;
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  auto has = [&](const char* needle) {
    return text.find(needle) != std::string::npos;
  };
  if (has("placeholder")) return TaxonomyCode::T4;
  if (has("no deliverable") || has("no scorable") || has("missing file") ||
      has("no output"))
    return TaxonomyCode::T1;
  if (has("content type") || has("wrong type")) return TaxonomyCode::T2;
  if (has("formula")) return TaxonomyCode::T3;
  if (has("case") || has("whitespace")) return TaxonomyCode::T5;
  if (has("logic")) return TaxonomyCode::T6;
  if (has("rounding") || has("precision")) return TaxonomyCode::T7;
  return std::nullopt;
}

namespace {

std::string repair_rule_for(TaxonomyCode code) {
  switch (code) {
    case TaxonomyCode::T1:
      return "Do not end the session before the deliverable file is written "
             "and saved.";
    case TaxonomyCode::T2:
      return "Write the output in the content type the task asks for; check "
             "the expected file format before writing.";
    case TaxonomyCode::T3:
      return "Evaluate formulas to literal values before saving when the "
             "grader expects computed results.";
    case TaxonomyCode::T4:
      return "When a cell is marked pending or placeholder, compute the real "
             "value before ending the session.";
    case TaxonomyCode::T5:
      return "Match the expected casing and whitespace exactly; trim "
             "incidental spaces before writing values.";
    case TaxonomyCode::T6:
      return "Re-check the transformation logic against the task statement "
             "before writing results.";
    case TaxonomyCode::T7:
      return "Round numeric outputs to the precision the task specifies "
             "before writing them.";
  }
  return "";
}

}  // namespace

Patch MockErrorAnalyst::analyze(const AnalystInput& input,
                                BudgetedOracle& oracle) {
  Patch patch;
  patch.action = PatchAction::repair;
  patch.source_trajectory = input.tracecard.session_id;
  patch.id = patch.source_trajectory + "/repair";

  auto mismatches = oracle.inspect_mismatches();
  if (!mismatches || mismatches->empty()) {
    patch.rule =
        "Re-run the trajectory with verbose grading enabled; the mismatch "
        "surface was not observable.";
    patch.evidence = mismatches ? "inspect_mismatches returned no entries"
                                : "oracle unavailable";
    patch.confidence = Confidence::low;
    return patch;
  }

  const Mismatch& first = mismatches->front();
  auto code = map_mismatch_to_taxonomy(first);
  if (!code) {
    patch.rule =
        "Review the mismatched rubric items manually; the failure did not "
        "map to a known category.";
    patch.evidence = "undiagnosed mismatch: " + first.rubric_item + ": " +
                     first.description;
    patch.confidence = Confidence::low;
    return patch;
  }
  patch.failure_type = code;
  patch.rule = repair_rule_for(*code);
  patch.evidence = std::string(to_string(*code)) + " (" +
                   taxonomy_description(*code) + ") at rubric item '" +
                   first.rubric_item + "': " + first.description;
  patch.confidence = Confidence::high;
  return patch;
}

Patch run_error_analyst(ErrorAnalyst& analyst, const AnalystInput& input,
                        Oracle& oracle) {
  OracleBudget budget;
  BudgetedOracle gated(oracle, budget);
  Patch patch;
  bool invalid = false;
  try {
    patch = analyst.analyze(input, gated);
  } catch (...) {
    invalid = true;
  }
  if (!invalid && patch.action != PatchAction::repair) invalid = true;
  if (invalid) {
    patch = Patch{};
    patch.action = PatchAction::repair;
    patch.rule =
        "Re-examine this trajectory manually; the analyst did not produce a "
        "usable repair.";
    patch.evidence = "analyst failed to emit a valid repair patch";
    patch.confidence = Confidence::low;
  }
  if (gated.oracle_failed()) {
    patch.confidence = Confidence::low;
    patch.evidence = "oracle unavailable";
  } else if (gated.refused()) {
    patch.confidence = Confidence::low;
  }
  if (patch.evidence.empty()) {
    patch.evidence = "no oracle evidence recorded";
    patch.confidence = Confidence::low;
  }
  patch.source_trajectory = input.tracecard.session_id;
  if (patch.id.empty()) patch.id = patch.source_trajectory + "/repair";
  return patch;
}

// ---------------------------------------------------------------------------
// prune admission

PruneDecision admit_prune(const Patch& patch, const TraceCard& card,
                          const AdmitConfig& config) {
  PruneDecision decision;
  if (patch.action != PatchAction::prune) {
    decision.failed_condition = 'a';
    decision.reason = "not a prune patch";
    return decision;
  }

  bool named = false;
  for (const auto& span : card.top_cost_spans) {
    if (!span.span_id.empty() && span.span_id == patch.target_span) {
      named = true;
      break;
    }
  }
  if (!named) {
    for (const auto& cluster : card.redundant_tool_calls) {
      for (const auto& member : cluster.cluster) {
        if (member == patch.target_span) {
          named = true;
          break;
        }
      }
    }
  }
  if (!named) {
    decision.failed_condition = 'a';
    decision.reason = "target_span '" + patch.target_span +
                      "' is not a top_cost_spans entry or cluster member";
    return decision;
  }

  if (config.require_counterfactual &&
      patch.counterfactual.size() < config.counterfactual_min_chars) {
    decision.failed_condition = 'b';
    decision.reason = "counterfactual shorter than " +
                      std::to_string(config.counterfactual_min_chars) +
                      " characters";
    return decision;
  }

  static const std::regex kCapPatterns[] = {
      std::regex(R"(\$\s*\d)", std::regex::icase),
      std::regex(R"(at most\s+\d+\s+(tokens?|calls?))", std::regex::icase),
      std::regex(R"(fewer than\s+\d+)", std::regex::icase)};
  for (const auto& re : kCapPatterns) {
    if (std::regex_search(patch.rule, re)) {
      decision.failed_condition = 'c';
      decision.reason = "rule phrases a hard cost cap";
      return decision;
    }
  }

  decision.accepted = true;
  return decision;
}

// ---------------------------------------------------------------------------
// merge

namespace {

// -1 negative (avoid-class), +1 positive (keep-class), 0 neutral.
int rule_polarity(const std::string& rule) {
  std::string text = rule;
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const char* kw : {"avoid", "do not", "don't", "never", "skip "})
    if (text.find(kw) != std::string::npos) return -1;
  for (const char* kw : {"always", "keep ", "keep the", "ensure", "prefer"})
    if (text.find(kw) != std::string::npos) return 1;
  return 0;
}

bool patches_conflict(const Patch& a, const Patch& b, double threshold) {
  if (!a.target_span.empty() && a.target_span == b.target_span) return true;
  if (normalized_similarity(a.rule, b.rule) < threshold) return false;
  int pa = rule_polarity(a.rule);
  int pb = rule_polarity(b.rule);
  return pa != 0 && pb != 0 && pa != pb;
}

int action_rank(PatchAction action) {
  switch (action) {
    case PatchAction::repair: return 2;
    case PatchAction::prune: return 1;
    case PatchAction::preserve: return 0;
  }
  return 0;
}

int confidence_rank(Confidence c) {
  switch (c) {
    case Confidence::high: return 2;
    case Confidence::medium: return 1;
    case Confidence::low: return 0;
  }
  return 0;
}

struct Merged {
  Patch patch;
  std::vector<std::string> provenance;
  std::set<std::string> trajectories;
};

// Evidenced repairs, then admitted prunes, then low-confidence repairs,
// then surviving preserves.
int priority_band(const Patch& p) {
  if (p.action == PatchAction::repair)
    return p.confidence == Confidence::low ? 2 : 0;
  if (p.action == PatchAction::prune) return 1;
  return 3;
}

SkillSection route_section(const Patch& p) {
  switch (p.action) {
    case PatchAction::preserve: return SkillSection::workflow;
    case PatchAction::prune: return SkillSection::cost_control;
    case PatchAction::repair: break;
  }
  if (!p.failure_type) return SkillSection::stop_rules;
  switch (*p.failure_type) {
    case TaxonomyCode::T1:
    case TaxonomyCode::T3: return SkillSection::stop_rules;
    case TaxonomyCode::T6: return SkillSection::workflow;
    default: return SkillSection::artifact_checklist;
  }
}

}  // namespace

SkillDocument merge(std::vector<Patch> patches, const MergeConfig& config) {
  // Invariant-violating patches never reach the document.
  patches.erase(std::remove_if(patches.begin(), patches.end(),
                               [](const Patch& p) {
                                 return !patch_invariant_error(p).empty();
                               }),
                patches.end());

  // Canonical order makes the fold invariant to input permutation:
  // "first" and "earlier" below always refer to this order.
  std::sort(patches.begin(), patches.end(), [](const Patch& a, const Patch& b) {
    if (a.source_trajectory != b.source_trajectory)
      return a.source_trajectory < b.source_trajectory;
    if (a.action != b.action) return a.action < b.action;
    if (a.rule != b.rule) return a.rule < b.rule;
    return a.id < b.id;
  });

  // Near-duplicate rules merge into the first of their action group.
  std::vector<Merged> merged;
  for (const auto& p : patches) {
    Merged* home = nullptr;
    for (auto& m : merged) {
      if (m.patch.action != p.action) continue;
      if (normalized_similarity(m.patch.rule, p.rule) >=
          config.dedup_similarity) {
        home = &m;
        break;
      }
    }
    if (home) {
      home->provenance.push_back(p.id);
      home->trajectories.insert(p.source_trajectory);
    } else {
      Merged m;
      m.patch = p;
      m.provenance = {p.id};
      m.trajectories = {p.source_trajectory};
      merged.push_back(std::move(m));
    }
  }

  // Singleton preserve patches are dropped.
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Merged& m) {
                                return m.patch.action == PatchAction::preserve &&
                                       m.trajectories.size() < 2;
                              }),
               merged.end());

  // Conflict resolution: repair supersedes prune supersedes preserve; same
  // action keeps higher confidence, then the earlier trajectory. Scanning
  // from the highest precedence down means a superseded patch never
  // eliminates anyone itself.
  std::vector<const Merged*> by_precedence;
  for (const auto& m : merged) by_precedence.push_back(&m);
  std::stable_sort(by_precedence.begin(), by_precedence.end(),
                   [](const Merged* a, const Merged* b) {
                     int ra = action_rank(a->patch.action);
                     int rb = action_rank(b->patch.action);
                     if (ra != rb) return ra > rb;
                     int ca = confidence_rank(a->patch.confidence);
                     int cb = confidence_rank(b->patch.confidence);
                     if (ca != cb) return ca > cb;
                     if (a->patch.source_trajectory != b->patch.source_trajectory)
                       return a->patch.source_trajectory <
                              b->patch.source_trajectory;
                     return a->patch.id < b->patch.id;
                   });
  std::vector<const Merged*> survivors;
  for (const Merged* candidate : by_precedence) {
    bool superseded = false;
    for (const Merged* kept : survivors) {
      if (patches_conflict(kept->patch, candidate->patch,
                           config.conflict_similarity)) {
        superseded = true;
        break;
      }
    }
    if (!superseded) survivors.push_back(candidate);
  }
  std::stable_sort(survivors.begin(), survivors.end(),
                   [](const Merged* a, const Merged* b) {
                     if (priority_band(a->patch) != priority_band(b->patch))
                       return priority_band(a->patch) < priority_band(b->patch);
                     if (a->patch.source_trajectory != b->patch.source_trajectory)
                       return a->patch.source_trajectory <
                              b->patch.source_trajectory;
                     return a->patch.id < b->patch.id;
                   });

  SkillDocument doc;
  doc.at(SkillSection::trigger)
      .push_back(SkillRule{
          config.task_family.empty()
              ? "Apply this skill when the task matches the trained family."
              : "Apply this skill when the task matches: " + config.task_family,
          {"config/trigger"}});
  for (const Merged* m : survivors) {
    doc.at(route_section(m->patch))
        .push_back(SkillRule{m->patch.rule, m->provenance});
  }

  auto violations = post_check(doc, config.denylist, config.token_ceiling);
  if (!violations.empty()) throw PostCheckFailure(violations);
  return doc;
}

std::vector<std::string> post_check(const SkillDocument& doc,
                                    const std::vector<std::string>& denylist,
                                    size_t token_ceiling) {
  std::vector<std::string> violations;
  std::string rendered = render_markdown(doc);

  for (size_t i = 0; i < 5; ++i) {
    std::string heading =
        std::string("## ") + section_heading(static_cast<SkillSection>(i));
    if (rendered.find(heading) == std::string::npos)
      violations.push_back("missing section heading: " +
                           std::string(section_heading(static_cast<SkillSection>(i))));
  }

  size_t measure = token_measure(rendered);
  if (measure > token_ceiling)
    violations.push_back("token ceiling exceeded: " + std::to_string(measure) +
                         " > " + std::to_string(token_ceiling));

  for (const auto& identifier : denylist) {
    if (identifier.empty()) continue;
    for (size_t i = 0; i < 5; ++i) {
      const auto& rules = doc.sections[i];
      for (size_t r = 0; r < rules.size(); ++r) {
        if (rules[r].text.find(identifier) != std::string::npos) {
          violations.push_back(
              "leaked identifier '" + identifier + "' in " +
              section_heading(static_cast<SkillSection>(i)) + " rule " +
              std::to_string(r));
        }
      }
    }
  }
  return violations;
}

std::unique_ptr<Oracle> make_mock_oracle(const TraceCard& card,
                                         const std::string& outcome) {
  std::vector<Mismatch> mismatches;
  if (outcome == "fail") {
    mismatches.push_back(
        {"deliverable", "no deliverable produced by the session"});
  } else if (!card.failed_or_repaired.empty()) {
    mismatches.push_back(
        {"cell A1", "placeholder mismatch: expected a computed value"});
  } else {
    mismatches.push_back(
        {"formatting", "case/whitespace difference in output cells"});
  }
  return std::make_unique<FixtureOracle>(std::move(mismatches));
}

DistillationRun distill_cards(
    const std::vector<TraceCard>& cards,
    const std::map<std::string, std::string>& outcomes, bool cost_visible,
    bool include_prunes, const AdmitConfig& admit,
    SuccessAnalyst& success_analyst, ErrorAnalyst& error_analyst,
    const OracleFactory& oracle_factory, const MergeConfig& merge_config) {
  DistillationRun run;
  for (const auto& card : cards) {
    auto outcome_it = outcomes.find(card.session_id);
    if (outcome_it == outcomes.end()) {
      run.diagnostics.push_back("no outcome for card " + card.session_id +
                                "; skipped");
      continue;
    }
    const std::string& outcome = outcome_it->second;
    AnalystInput input;
    input.tracecard = cost_visible ? card : strip_costs(card);
    input.outcome = outcome;
    input.cost_visible = cost_visible;

    if (outcome == "success") {
      auto patches = success_analyst.analyze(input);
      size_t preserves = 0, prunes = 0;
      for (auto& p : patches) {
        std::string invalid = patch_invariant_error(p);
        if (!invalid.empty()) {
          run.diagnostics.push_back("filtered invalid patch from " +
                                    card.session_id + ": " + invalid);
          continue;
        }
        if (p.action == PatchAction::preserve && ++preserves > 1) {
          run.diagnostics.push_back("extra preserve patch from " +
                                    card.session_id + " dropped");
          continue;
        }
        if (p.action == PatchAction::prune) {
          if (++prunes > 1) {
            run.diagnostics.push_back("extra prune patch from " +
                                      card.session_id + " dropped");
            continue;
          }
          auto decision = admit_prune(p, input.tracecard, admit);
          run.analyst_patches.push_back(p);
          if (!decision.accepted) {
            run.diagnostics.push_back(
                "prune from " + card.session_id + " rejected (condition " +
                std::string(1, decision.failed_condition) + "): " +
                decision.reason);
            continue;
          }
          run.merged_input.push_back(std::move(p));
          continue;
        }
        run.analyst_patches.push_back(p);
        run.merged_input.push_back(std::move(p));
      }
    } else {
      auto oracle = oracle_factory ? oracle_factory(input.tracecard, outcome)
                                   : make_mock_oracle(input.tracecard, outcome);
      Patch patch = run_error_analyst(error_analyst, input, *oracle);
      run.analyst_patches.push_back(patch);
      run.merged_input.push_back(std::move(patch));
    }
  }

  if (!include_prunes) {
    run.merged_input.erase(
        std::remove_if(run.merged_input.begin(), run.merged_input.end(),
                       [](const Patch& p) {
                         return p.action == PatchAction::prune;
                       }),
        run.merged_input.end());
  }

  run.document = merge(run.merged_input, merge_config);
  return run;
}

bool prune_rule_matches(const Patch& rule, const TraceCard& baseline_card) {
  if (rule.action != PatchAction::prune || !rule.waste) return false;
  const WastePattern& pattern = *rule.waste;

  if (pattern.requires_redundant_cluster) {
    for (const auto& cluster : baseline_card.redundant_tool_calls) {
      if (pattern.tool.empty() || cluster.tool == pattern.tool) return true;
    }
    return false;
  }

  if (pattern.args_contains.empty()) return false;
  std::vector<std::string> alternatives;
  std::istringstream in(pattern.args_contains);
  std::string alt;
  while (std::getline(in, alt, '|'))
    if (!alt.empty()) alternatives.push_back(alt);
  for (const auto& span : baseline_card.top_cost_spans) {
    for (const auto& a : alternatives) {
      if (span.args_sample.find(a) != std::string::npos) return true;
    }
  }
  return false;
}

}  // namespace clawtrace
