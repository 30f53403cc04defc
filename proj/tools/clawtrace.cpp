#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "clawtrace/card_yaml.hpp"
#include "clawtrace/cost.hpp"
#include "clawtrace/distill.hpp"
#include "clawtrace/errors.hpp"
#include "clawtrace/eval.hpp"
#include "clawtrace/ingest.hpp"
#include "clawtrace/span_tree.hpp"
#include "clawtrace/synth.hpp"
#include "clawtrace/tracecard.hpp"

namespace fs = std::filesystem;
using namespace clawtrace;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotFound = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPostCheck = 3;

IngestService* g_service = nullptr;

void handle_signal(int) {
  if (g_service) g_service->stop();
}

struct Options {
  std::string config_path;
  std::string data_dir = "./clawtrace-data";
  std::string pricing_path;
  std::string listen = "127.0.0.1:8787";
  std::string failure_patterns_path;
  std::string denylist_path;
  uint64_t seed = 0;
};

// A single JSON config file may supply any global option; explicit flags
// and environment variables win over it.
void merge_config_file(CLI::App& app, Options& opt) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) throw ConfigError("cannot read config file: " + opt.config_path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw ConfigError("config file is not a JSON object: " + opt.config_path);
  auto take = [&](const char* key, const char* flag, std::string& slot) {
    if (doc.contains(key) && app.get_option(flag)->count() == 0)
      slot = doc[key].get<std::string>();
  };
  take("data_dir", "--data-dir", opt.data_dir);
  take("pricing_path", "--pricing", opt.pricing_path);
  take("listen", "--listen", opt.listen);
  take("failure_patterns_path", "--failure-patterns",
       opt.failure_patterns_path);
  take("denylist_path", "--denylist", opt.denylist_path);
  if (doc.contains("seed") && app.get_option("--seed")->count() == 0)
    opt.seed = doc["seed"].get<uint64_t>();
}

PricingTable load_pricing(const Options& opt) {
  if (opt.pricing_path.empty()) return default_pricing();
  return PricingTable::load(opt.pricing_path);
}

CompilerConfig load_compiler_config(const Options& opt) {
  CompilerConfig config = default_compiler_config();
  if (!opt.failure_patterns_path.empty()) {
    std::ifstream in(opt.failure_patterns_path);
    if (!in)
      throw ConfigError("cannot read failure patterns: " +
                        opt.failure_patterns_path);
    config.failure_patterns.clear();
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') config.failure_patterns.push_back(line);
    }
    compile_failure_patterns(config.failure_patterns);  // validate at load
  }
  return config;
}

std::pair<std::string, int> split_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos)
    throw ConfigError("listen address must be host:port, got " + listen);
  return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
}

// Builds every session tree, resolves sub-agent links, and compiles cards
// with child sessions available for the sub_agents summaries.
std::map<std::string, TraceCard> compile_store(const EventStore& store,
                                               const PricingTable& pricing,
                                               const CompilerConfig& config,
                                               const std::vector<std::string>& keys) {
  std::vector<SessionTree> trees;
  for (const auto& key : store.session_keys())
    trees.push_back(build_tree(store.load_session(key)));
  LinkageMap map = build_linkage(trees);
  CallGraph graph = resolve_links(std::move(trees), map);

  std::map<std::string, TraceCard> cards;
  for (const auto& key : keys) {
    auto it = graph.sessions.find(key);
    if (it == graph.sessions.end()) throw NotFoundError("unknown session: " + key);
    std::map<std::string, const SessionTree*> children;
    auto attached = graph.attached.find(key);
    if (attached != graph.attached.end()) {
      for (const auto& link : attached->second) {
        auto child = graph.sessions.find(link.child_session_key);
        if (child != graph.sessions.end())
          children.emplace(link.child_session_key, &child->second);
      }
    }
    cards.emplace(key, compile_card(it->second, pricing, config, children));
  }
  return cards;
}

int cmd_serve(const Options& opt) {
  EventStore store(opt.data_dir);
  IngestService service(store);
  g_service = &service;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  auto [host, port] = split_listen(opt.listen);
  std::cerr << "clawtrace: serving on " << host << ":" << port
            << " (data: " << opt.data_dir << ")\n";
  if (!service.run(host, port))
    throw ConfigError("cannot bind " + opt.listen);
  std::cerr << "clawtrace: shut down\n";
  return kExitOk;
}

int cmd_compile(const Options& opt, std::vector<std::string> keys, bool all,
                const std::string& out_dir) {
  EventStore store(opt.data_dir);
  if (all) keys = store.session_keys();
  if (keys.empty()) throw ConfigError("no sessions to compile");

  std::vector<std::string> missing;
  auto known = store.session_keys();
  for (const auto& key : keys)
    if (std::find(known.begin(), known.end(), key) == known.end())
      missing.push_back(key);
  if (!missing.empty()) {
    std::cerr << "clawtrace: unknown sessions:";
    for (const auto& key : missing) std::cerr << " " << key;
    std::cerr << "\n";
    return kExitNotFound;
  }

  auto cards = compile_store(store, load_pricing(opt),
                             load_compiler_config(opt), keys);
  fs::create_directories(out_dir);
  for (const auto& [key, card] : cards) {
    fs::path path = fs::path(out_dir) / (encode_session_filename(key) + ".yaml");
    std::ofstream out(path, std::ios::binary);
    out << emit_yaml(card);
    std::cout << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_render(const Options& opt, const std::string& key, bool timeline,
               bool with_cost) {
  EventStore store(opt.data_dir);
  SessionTree tree = build_tree(store.load_session(key));
  if (timeline) {
    std::cout << render_timeline(tree);
    return kExitOk;
  }
  if (!with_cost) {
    std::cout << render_tree(tree);
    return kExitOk;
  }
  SessionCost cost = session_cost(tree, load_pricing(opt));
  CostAnnotations notes;
  for (const auto& [span_id, breakdown] : cost.per_span)
    notes.emplace(span_id, breakdown.total_usd.to_string());
  std::cout << render_tree(tree, &notes);
  return kExitOk;
}

std::vector<TraceCard> load_cards_dir(const std::string& dir) {
  std::vector<TraceCard> cards;
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".yaml")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    cards.push_back(parse_yaml(ss.str()));
  }
  if (cards.empty()) throw ConfigError("no .yaml cards in " + dir);
  return cards;
}

int cmd_distill(const Options& opt, const std::string& cards_dir,
                const std::string& outcomes_path, const std::string& condition,
                const std::string& out_path, const std::string& provenance_path,
                const std::string& task_family) {
  auto cond = condition_from_string(condition);
  if (!cond) throw ConfigError("unknown condition: " + condition);
  if (*cond == ConditionId::baseline)
    throw ConfigError("baseline bypasses distillation; nothing to write");

  auto cards = load_cards_dir(cards_dir);
  auto rows = load_results(outcomes_path);

  std::map<std::string, std::string> outcomes;
  MergeConfig merge_config;
  merge_config.task_family = task_family;
  for (const auto& row : rows) {
    if (row.condition != ConditionId::baseline) continue;
    const char* label = row.quality.micro == Quality::kOne ? "success"
                        : row.quality.micro == 0           ? "fail"
                                                           : "partial";
    outcomes[row.task_id] = label;
    // Training task ids must never leak into the skill text.
    merge_config.denylist.push_back(row.task_id);
  }
  if (!opt.denylist_path.empty()) {
    std::ifstream in(opt.denylist_path);
    if (!in) throw ConfigError("cannot read denylist: " + opt.denylist_path);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) merge_config.denylist.push_back(line);
  }

  DistillInputs inputs = apply_condition(std::move(cards), {}, *cond);
  AdmitConfig admit;
  admit.require_counterfactual = inputs.require_counterfactual;
  MockSuccessAnalyst success;
  MockErrorAnalyst error;

  DistillationRun run;
  try {
    run = distill_cards(inputs.cards, outcomes, inputs.cost_visible,
                        inputs.include_prunes, admit, success, error, {},
                        merge_config);
  } catch (const PostCheckFailure& e) {
    std::cerr << "clawtrace: post-check violations:\n";
    for (const auto& v : e.violations) std::cerr << "  - " << v << "\n";
    return kExitPostCheck;
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + out_path);
  out << render_markdown(run.document);
  std::cout << out_path << "\n";

  if (!provenance_path.empty()) {
    std::ofstream prov(provenance_path, std::ios::binary);
    prov << "condition: " << to_string(*cond) << "\n";
    prov << patches_to_yaml(run.merged_input);
    prov << skill_to_yaml(run.document);
    std::cout << provenance_path << "\n";
  }
  for (const auto& d : run.diagnostics) std::cerr << "note: " << d << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& results_path, const std::string& baseline,
             const std::string& skill, const std::string& out_md,
             const std::string& out_json) {
  auto base_cond = condition_from_string(baseline);
  auto skill_cond = condition_from_string(skill);
  if (!base_cond || !skill_cond)
    throw ConfigError("unknown condition: " + (!base_cond ? baseline : skill));
  auto rows = load_results(results_path);
  auto pairs = pair_outcomes(rows, *base_cond, *skill_cond);
  if (pairs.empty())
    throw ConfigError("no paired tasks between " + baseline + " and " + skill);
  SummaryReport report = summarize(std::move(pairs));
  report.skill_condition = *skill_cond;

  std::string md = report_markdown(report);
  if (out_md.empty()) {
    std::cout << md;
  } else {
    std::ofstream out(out_md, std::ios::binary);
    out << md;
    std::cout << out_md << "\n";
  }
  if (!out_json.empty()) {
    std::ofstream out(out_json, std::ios::binary);
    out << report_json(report) << "\n";
    std::cout << out_json << "\n";
  }
  return kExitOk;
}

int cmd_synth(const Options& opt, const std::string& out_dir,
              const std::string& profile, int sessions) {
  std::vector<std::vector<TraceEvent>> batches;
  std::string outcomes_csv;
  if (profile == "smoke") {
    SynthCorpus corpus = synth_smoke_corpus(opt.seed);
    batches = std::move(corpus.sessions);
    outcomes_csv = std::move(corpus.outcomes_csv);
  } else if (profile == "redundancy") {
    batches = synth_redundancy_corpus(opt.seed);
  } else if (profile == "size") {
    batches.push_back(synth_big_session(opt.seed));
  } else if (profile == "robustness") {
    batches = synth_robustness_corpus(opt.seed);
  } else if (profile == "random") {
    batches = synth_random_sessions(opt.seed, sessions);
  } else {
    throw ConfigError("unknown synth profile: " + profile);
  }

  fs::path dir(out_dir);
  fs::create_directories(dir / "batches");
  for (size_t i = 0; i < batches.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "batch_%03zu.ndjson", i);
    std::ofstream out(dir / "batches" / name, std::ios::binary);
    for (const auto& ev : batches[i]) out << canonical_serialize(ev) << "\n";
  }
  if (!outcomes_csv.empty()) {
    std::ofstream out(dir / "outcomes.csv", std::ios::binary);
    out << outcomes_csv;
  }
  std::cout << dir.string() << ": " << batches.size() << " session batches\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clawtrace: agent trace ingestion, TraceCards, and skill distillation"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--config", opt.config_path, "JSON config file");
  app.add_option("--data-dir", opt.data_dir, "event store directory")
      ->envname("CLAWTRACE_DATA_DIR");
  app.add_option("--pricing", opt.pricing_path, "pricing table JSON")
      ->envname("CLAWTRACE_PRICING");
  app.add_option("--failure-patterns", opt.failure_patterns_path,
                 "failure pattern regex file, one per line");
  app.add_option("--denylist", opt.denylist_path,
                 "extra leakage identifiers, one per line");
  app.add_option("--seed", opt.seed, "seed for synthetic corpora");

  auto* serve = app.add_subcommand("serve", "run the ingest endpoint");
  serve->add_option("--listen", opt.listen, "host:port")
      ->envname("CLAWTRACE_LISTEN");

  std::vector<std::string> compile_keys;
  bool compile_all = false;
  std::string compile_out = "";
  auto* compile = app.add_subcommand("compile", "compile sessions to TraceCards");
  compile->add_option("keys", compile_keys, "session keys");
  compile->add_flag("--all", compile_all, "compile every stored session");
  compile->add_option("--out", compile_out, "output directory");

  std::string render_key;
  bool render_cost = false;
  auto* tree = app.add_subcommand("tree", "render a session's span tree");
  tree->add_option("key", render_key, "session key")->required();
  tree->add_flag("--cost", render_cost, "annotate spans with USD cost");
  auto* timeline = app.add_subcommand("timeline", "render a session's Gantt view");
  timeline->add_option("key", render_key, "session key")->required();

  std::string cards_dir, outcomes_path, condition = "full";
  std::string skill_out = "skill.md", provenance_out, task_family;
  auto* distill = app.add_subcommand("distill", "distill TraceCards into a skill");
  distill->add_option("--cards", cards_dir, "directory of card .yaml files")
      ->required();
  distill->add_option("--outcomes", outcomes_path, "results csv")->required();
  distill->add_option("--condition", condition,
                      "full|no_prune|no_cost_attr|no_cf");
  distill->add_option("--out", skill_out, "skill markdown output");
  distill->add_option("--provenance", provenance_out, "patch provenance yaml");
  distill->add_option("--task-family", task_family, "Trigger section text");

  std::string results_path, baseline_cond = "baseline", skill_cond = "full";
  std::string eval_md, eval_json;
  auto* eval = app.add_subcommand("eval", "paired baseline-vs-skill comparison");
  eval->add_option("--results", results_path, "results csv")->required();
  eval->add_option("--baseline-condition", baseline_cond, "baseline condition");
  eval->add_option("--skill-condition", skill_cond, "skill condition");
  eval->add_option("--out-md", eval_md, "markdown report path");
  eval->add_option("--out-json", eval_json, "json report path");

  std::string synth_out = "synth-out", synth_profile = "smoke";
  int synth_sessions = 8;
  auto* synth = app.add_subcommand("synth", "write a synthetic event corpus");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--profile", synth_profile,
                    "smoke|redundancy|size|robustness|random");
  synth->add_option("--sessions", synth_sessions, "session count (random)");

  // Global options are accepted after the subcommand too.
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
    merge_config_file(app, opt);

    if (serve->parsed()) return cmd_serve(opt);
    if (compile->parsed()) {
      std::string out = compile_out.empty()
                            ? (fs::path(opt.data_dir) / "cards").string()
                            : compile_out;
      return cmd_compile(opt, compile_keys, compile_all, out);
    }
    if (tree->parsed()) return cmd_render(opt, render_key, false, render_cost);
    if (timeline->parsed()) return cmd_render(opt, render_key, true, false);
    if (distill->parsed())
      return cmd_distill(opt, cards_dir, outcomes_path, condition, skill_out,
                         provenance_out, task_family);
    if (eval->parsed())
      return cmd_eval(results_path, baseline_cond, skill_cond, eval_md,
                      eval_json);
    if (synth->parsed())
      return cmd_synth(opt, synth_out, synth_profile, synth_sessions);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const NotFoundError& e) {
    std::cerr << "clawtrace: " << e.what() << "\n";
    return kExitNotFound;
  } catch (const PostCheckFailure& e) {
    std::cerr << "clawtrace: " << e.what() << "\n";
    return kExitPostCheck;
  } catch (const std::exception& e) {
    std::cerr << "clawtrace: " << e.what() << "\n";
    return kExitConfig;
  }
}
