#include "clawtrace/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "clawtrace/card_yaml.hpp"
#include "clawtrace/errors.hpp"

namespace clawtrace {

Quality Quality::parse(std::string_view text) {
  if (text.empty()) throw ConfigError("empty quality value");
  size_t i = 0;
  int64_t whole = 0;
  size_t digits = 0;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]));
       ++i, ++digits)
    whole = whole * 10 + (text[i] - '0');
  if (digits == 0)
    throw ConfigError("malformed quality value: " + std::string(text));
  int64_t frac = 0;
  size_t frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]));
         ++i) {
      if (++frac_digits > 6)
        throw ConfigError("quality finer than 1e-6: " + std::string(text));
      frac = frac * 10 + (text[i] - '0');
    }
  }
  if (i != text.size())
    throw ConfigError("malformed quality value: " + std::string(text));
  for (size_t d = frac_digits; d < 6; ++d) frac *= 10;
  Quality q{whole * kOne + frac};
  if (q.micro < 0 || q.micro > kOne)
    throw ConfigError("quality outside [0,1]: " + std::string(text));
  return q;
}

const char* to_string(ConditionId id) {
  switch (id) {
    case ConditionId::baseline: return "baseline";
    case ConditionId::full: return "full";
    case ConditionId::no_prune: return "no_prune";
    case ConditionId::no_cost_attr: return "no_cost_attr";
    case ConditionId::no_cf: return "no_cf";
  }
  return "?";
}

std::optional<ConditionId> condition_from_string(std::string_view name) {
  for (auto id : {ConditionId::baseline, ConditionId::full,
                  ConditionId::no_prune, ConditionId::no_cost_attr,
                  ConditionId::no_cf}) {
    if (name == to_string(id)) return id;
  }
  return std::nullopt;
}

const char* to_string(PairClass c) {
  switch (c) {
    case PairClass::win: return "win";
    case PairClass::tie: return "tie";
    case PairClass::regression: return "regression";
  }
  return "?";
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::success: return "success";
    case Regime::partial: return "partial";
    case Regime::fail: return "fail";
  }
  return "?";
}

Regime regime_of(Quality q) {
  if (q.micro == Quality::kOne) return Regime::success;
  if (q.micro == 0) return Regime::fail;
  return Regime::partial;
}

PairedResult classify_pair(const TaskOutcome& baseline,
                           const TaskOutcome& skill) {
  if (baseline.task_id != skill.task_id)
    throw PairingError("paired outcomes name different tasks: " +
                       baseline.task_id + " vs " + skill.task_id);
  constexpr int64_t kBand = Quality::kOne / 100;  // 0.01, exact
  PairedResult pair;
  pair.task_id = baseline.task_id;
  pair.baseline_q = baseline.quality;
  pair.skill_q = skill.quality;
  pair.delta_q = static_cast<double>(skill.quality.micro -
                                     baseline.quality.micro) /
                 Quality::kOne;
  if (skill.quality.micro < baseline.quality.micro - kBand)
    pair.classification = PairClass::regression;
  else if (skill.quality.micro > baseline.quality.micro + kBand)
    pair.classification = PairClass::win;
  else
    pair.classification = PairClass::tie;
  if (baseline.cost_usd > Money{}) {
    pair.delta_cost_fraction =
        static_cast<double>(skill.cost_usd.pico() - baseline.cost_usd.pico()) /
        static_cast<double>(baseline.cost_usd.pico());
  }
  pair.catastrophic = skill.quality.micro == 0 && baseline.quality.micro > 0;
  pair.regime = regime_of(baseline.quality);
  return pair;
}

namespace {

// Lower of the two central elements for even n.
std::optional<double> lower_median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

}  // namespace

SummaryReport summarize(std::vector<PairedResult> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const PairedResult& a, const PairedResult& b) {
              return a.task_id < b.task_id;
            });
  SummaryReport report;
  report.n = static_cast<int>(pairs.size());
  std::vector<double> all_deltas;
  std::map<Regime, std::vector<const PairedResult*>> by_regime;
  for (const auto& p : pairs) {
    switch (p.classification) {
      case PairClass::win: ++report.wins; break;
      case PairClass::tie: ++report.ties; break;
      case PairClass::regression: ++report.regressions; break;
    }
    if (p.catastrophic) ++report.catastrophic;
    if (p.delta_cost_fraction) all_deltas.push_back(*p.delta_cost_fraction);
    by_regime[p.regime].push_back(&p);
  }
  if (report.n > 0) {
    report.preservation_rate =
        static_cast<double>(report.ties + report.wins) / report.n;
    report.ties_only_rate = static_cast<double>(report.ties) / report.n;
    report.regression_rate = static_cast<double>(report.regressions) / report.n;
  }
  report.median_delta_cost = lower_median(all_deltas);
  for (Regime regime : {Regime::success, Regime::partial, Regime::fail}) {
    RegimeRow row;
    row.regime = regime;
    std::vector<double> deltas;
    for (const PairedResult* p : by_regime[regime]) {
      ++row.n;
      switch (p->classification) {
        case PairClass::win: ++row.wins; break;
        case PairClass::tie: ++row.ties; break;
        case PairClass::regression: ++row.regressions; break;
      }
      if (p->catastrophic) ++row.catastrophic;
      if (p->delta_cost_fraction) deltas.push_back(*p->delta_cost_fraction);
    }
    row.median_delta_cost = lower_median(deltas);
    report.regime_rows.push_back(std::move(row));
  }
  report.pairs = std::move(pairs);
  return report;
}

DistillInputs apply_condition(std::vector<TraceCard> cards,
                              std::vector<Patch> patches, ConditionId cond) {
  DistillInputs inputs;
  inputs.cards = std::move(cards);
  inputs.patches = std::move(patches);
  switch (cond) {
    case ConditionId::baseline:
      inputs.bypass = true;
      break;
    case ConditionId::full:
      break;
    case ConditionId::no_prune:
      inputs.include_prunes = false;
      inputs.patches.erase(
          std::remove_if(inputs.patches.begin(), inputs.patches.end(),
                         [](const Patch& p) {
                           return p.action == PatchAction::prune;
                         }),
          inputs.patches.end());
      break;
    case ConditionId::no_cost_attr:
      inputs.cost_visible = false;
      for (auto& card : inputs.cards) card = strip_costs(card);
      break;
    case ConditionId::no_cf:
      inputs.require_counterfactual = false;
      break;
  }
  return inputs;
}

PruneCoverage prune_coverage(const std::vector<Patch>& rules,
                             const std::vector<TraceCard>& baseline_cards) {
  PruneCoverage coverage;
  for (const auto& card : baseline_cards) {
    if (card.outcome != "success") continue;
    ++coverage.success_cards;
    for (const auto& rule : rules) {
      if (prune_rule_matches(rule, card)) {
        ++coverage.matched;
        coverage.matched_tasks.push_back(card.session_id);
        break;
      }
    }
  }
  if (coverage.success_cards > 0)
    coverage.fraction =
        static_cast<double>(coverage.matched) / coverage.success_cards;
  return coverage;
}

std::vector<TaskOutcome> parse_results(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "task_id,condition,quality,cost_usd")
    throw ConfigError(
        "results file must start with header "
        "'task_id,condition,quality,cost_usd'");
  std::vector<TaskOutcome> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 4)
      throw ConfigError("results line " + std::to_string(number) +
                        ": expected 4 comma-separated fields");
    TaskOutcome row;
    row.task_id = fields[0];
    auto cond = condition_from_string(fields[1]);
    if (!cond)
      throw ConfigError("results line " + std::to_string(number) +
                        ": unknown condition '" + fields[1] + "'");
    row.condition = *cond;
    row.quality = Quality::parse(fields[2]);
    row.cost_usd = Money::parse(fields[3]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TaskOutcome> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read results file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_results(ss.str());
}

std::vector<PairedResult> pair_outcomes(const std::vector<TaskOutcome>& rows,
                                        ConditionId baseline,
                                        ConditionId skill) {
  std::map<std::string, const TaskOutcome*> base_rows;
  for (const auto& r : rows)
    if (r.condition == baseline) base_rows[r.task_id] = &r;
  std::vector<PairedResult> pairs;
  for (const auto& r : rows) {
    if (r.condition != skill) continue;
    auto it = base_rows.find(r.task_id);
    if (it == base_rows.end()) continue;  // unpaired skill row
    pairs.push_back(classify_pair(*it->second, r));
  }
  return pairs;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
  return buf;
}

std::string report_markdown(const SummaryReport& report) {
  std::ostringstream os;
  os << "# Evaluation summary: " << to_string(report.skill_condition)
     << " vs baseline\n\n";
  os << "- pairs: " << report.n << "\n";
  os << "- wins: " << report.wins << ", ties: " << report.ties
     << ", regressions: " << report.regressions << "\n";
  os << "- preservation rate (ties + wins): "
     << format_percent(report.preservation_rate) << "\n";
  os << "- ties-only rate: " << format_percent(report.ties_only_rate) << "\n";
  os << "- regression rate: " << format_percent(report.regression_rate)
     << "\n";
  os << "- catastrophic (skill Q=0, baseline Q>0): " << report.catastrophic
     << "\n";
  if (report.median_delta_cost)
    os << "- median delta cost: " << format_percent(*report.median_delta_cost)
       << "\n";
  os << "\n| regime | n | wins | ties | regressions | catastrophic | median "
        "delta cost |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const auto& row : report.regime_rows) {
    os << "| " << to_string(row.regime) << " | " << row.n << " | " << row.wins
       << " | " << row.ties << " | " << row.regressions << " | "
       << row.catastrophic << " | "
       << (row.median_delta_cost ? format_percent(*row.median_delta_cost)
                                 : std::string("n/a"))
       << " |\n";
  }
  bool any_regression = false;
  for (const auto& p : report.pairs) {
    if (p.classification != PairClass::regression) continue;
    if (!any_regression) {
      os << "\nRegressions:\n";
      any_regression = true;
    }
    os << "- " << p.task_id << ": Q " << p.baseline_q.value() << " -> "
       << p.skill_q.value() << (p.catastrophic ? " (catastrophic)" : "")
       << "\n";
  }
  return os.str();
}

std::string report_json(const SummaryReport& report) {
  nlohmann::ordered_json o;
  o["skill_condition"] = to_string(report.skill_condition);
  o["n"] = report.n;
  o["wins"] = report.wins;
  o["ties"] = report.ties;
  o["regressions"] = report.regressions;
  o["catastrophic"] = report.catastrophic;
  o["preservation_rate"] = report.preservation_rate;
  o["ties_only_rate"] = report.ties_only_rate;
  o["regression_rate"] = report.regression_rate;
  if (report.median_delta_cost)
    o["median_delta_cost"] = *report.median_delta_cost;
  else
    o["median_delta_cost"] = nullptr;
  o["regimes"] = nlohmann::ordered_json::array();
  for (const auto& row : report.regime_rows) {
    nlohmann::ordered_json r;
    r["regime"] = to_string(row.regime);
    r["n"] = row.n;
    r["wins"] = row.wins;
    r["ties"] = row.ties;
    r["regressions"] = row.regressions;
    r["catastrophic"] = row.catastrophic;
    if (row.median_delta_cost)
      r["median_delta_cost"] = *row.median_delta_cost;
    else
      r["median_delta_cost"] = nullptr;
    o["regimes"].push_back(std::move(r));
  }
  o["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs) {
    nlohmann::ordered_json e;
    e["task_id"] = p.task_id;
    e["baseline_q"] = p.baseline_q.value();
    e["skill_q"] = p.skill_q.value();
    e["class"] = to_string(p.classification);
    e["regime"] = to_string(p.regime);
    e["catastrophic"] = p.catastrophic;
    if (p.delta_cost_fraction)
      e["delta_cost_fraction"] = *p.delta_cost_fraction;
    else
      e["delta_cost_fraction"] = nullptr;
    o["pairs"].push_back(std::move(e));
  }
  return o.dump(2);
}

}  // namespace clawtrace
