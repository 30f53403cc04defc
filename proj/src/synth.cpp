#include "clawtrace/synth.hpp"

#include <cassert>

namespace clawtrace {

namespace {

constexpr int64_t kEpochBase = 1767225600000;  // 2026-01-01T00:00:00Z

const char* kToolNames[] = {"read_file", "write_file", "run_sql", "list_dir"};

struct Emitter {
  std::vector<TraceEvent> events;
  std::string key;
  int64_t seq = 0;
  int64_t ts = kEpochBase;

  TraceEvent& emit(EventKind kind) {
    TraceEvent ev;
    ev.session_key = key;
    ev.seq = seq++;
    ev.ts = ts;
    ev.kind = kind;
    events.push_back(std::move(ev));
    return events.back();
  }
};

}  // namespace

std::string synth_args_base() {
  return "read_file(path='input.xlsx', sheet=1, header=true)";
}

std::string synth_args_close() {
  std::string s = synth_args_base();
  s[25] = 'y';  // .xlsx -> .xlsy
  s[35] = '2';  // sheet=1 -> sheet=2
  s[45] = 'T';  // true -> True
  return s;
}

std::string synth_args_near() {
  std::string s = synth_args_base();
  for (size_t i : {2u, 6u, 12u, 16u, 20u, 26u, 30u, 34u, 38u, 42u, 46u})
    s[i] = 'Q';
  return s;
}

std::vector<TraceEvent> synth_session(const SessionSpec& spec, Rng& rng) {
  Emitter em;
  em.key = spec.key;
  em.ts = kEpochBase + static_cast<int64_t>(rng.next(86'400'000));

  auto& start = em.emit(EventKind::session_start);
  start.model = spec.model;

  // Planted pairs land in distinct turns so the repeat reads like a real
  // re-fetch rather than a retry loop. The final turn issues no tools, so
  // the second copy goes to the turn before it.
  int redundant_first = spec.turns >= 3 ? 0 : -1;
  int redundant_second = spec.turns >= 3 ? spec.turns - 2 : -1;
  int failure_turn = spec.plant_failure && spec.turns >= 2 ? spec.turns / 2 : -1;

  for (int turn = 0; turn < spec.turns; ++turn) {
    em.ts += rng.range(20, 200);
    em.emit(EventKind::llm_input);

    bool is_last = turn == spec.turns - 1;
    int tools = is_last ? 0 : spec.tools_per_turn;
    for (int t = 0; t < tools; ++t) {
      em.ts += rng.range(5, 60);
      auto& before = em.emit(EventKind::before_tool_call);
      bool planted =
          t == 0 && (spec.plant_redundant_pair || spec.plant_near_miss) &&
          (turn == redundant_first || turn == redundant_second);
      if (planted) {
        before.tool_name = "read_file";
        if (turn == redundant_first)
          before.args_text = synth_args_base();
        else
          before.args_text = spec.plant_near_miss ? synth_args_near()
                                                  : synth_args_close();
      } else {
        before.tool_name = kToolNames[rng.next(4)];
        // Payloads vary in both content and length so unplanted calls stay
        // far below the 0.8 clustering threshold.
        static const char alphabet[] =
            "abcdefghijklmnopqrstuvwxyz0123456789_/.-";
        std::string payload;
        size_t len = 12 + rng.next(48);
        for (size_t c = 0; c < len; ++c)
          payload.push_back(alphabet[rng.next(sizeof(alphabet) - 1)]);
        before.args_text = before.tool_name + "(q='" + payload + "')";
      }
      std::string tool_name = before.tool_name;
      std::string args = before.args_text;

      em.ts += rng.range(10, 300);
      auto& after = em.emit(EventKind::after_tool_call);
      bool fail_here = turn == failure_turn && t == 0;
      after.tool_error = fail_here;
      after.result_text = fail_here
                              ? "Traceback (most recent call last): boom"
                              : "ok: " + std::to_string(rng.next(100000));

      if (fail_here) {
        // Identical-args retry that succeeds: a repaired step.
        em.ts += rng.range(10, 80);
        auto& retry_before = em.emit(EventKind::before_tool_call);
        retry_before.tool_name = tool_name;
        retry_before.args_text = args;
        em.ts += rng.range(10, 200);
        auto& retry_after = em.emit(EventKind::after_tool_call);
        retry_after.tool_error = false;
        retry_after.result_text = "ok after retry";
      }
    }

    if (spec.spawn_subagent && turn == 0) {
      em.ts += rng.range(5, 40);
      auto& spawn = em.emit(EventKind::subagent_spawning);
      spawn.child_session_key = spec.child_key;
      em.ts += rng.range(50, 400);
      auto& done = em.emit(EventKind::subagent_ended);
      done.child_session_key = spec.child_key;
    }

    em.ts += rng.range(30, 400);
    auto& out = em.emit(EventKind::llm_output);
    TokenUsage usage;
    usage.input = rng.range(400, 5000);
    usage.output = rng.range(80, 1200);
    usage.cache_read = rng.range(0, usage.input);
    usage.cache_write = rng.range(0, 600);
    out.tokens = usage;
    out.text = is_last ? "final answer sheet written with totals " +
                             std::to_string(rng.next(100000))
                       : "working note " + std::to_string(rng.next(100000));
  }

  em.ts += rng.range(5, 50);
  auto& end = em.emit(EventKind::session_end);
  end.outcome = spec.outcome;
  return em.events;
}

std::vector<std::vector<TraceEvent>> synth_redundancy_corpus(uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<TraceEvent>> sessions;
  for (int i = 0; i < 10; ++i) {
    SessionSpec spec;
    spec.key = "synth-red-" + std::to_string(i);
    spec.turns = 4;
    spec.tools_per_turn = 1;
    spec.plant_redundant_pair = i < 5;
    spec.plant_near_miss = i == 9;  // clean card carrying the 0.78 pair
    // Unplanted tool args must not collide into accidental clusters.
    sessions.push_back(synth_session(spec, rng));
  }
  return sessions;
}

std::vector<std::vector<TraceEvent>> synth_random_sessions(uint64_t seed,
                                                           int count) {
  Rng rng(seed);
  std::vector<std::vector<TraceEvent>> sessions;
  for (int i = 0; i < count; ++i) {
    SessionSpec spec;
    spec.key = "synth-rand-" + std::to_string(i);
    spec.turns = static_cast<int>(2 + rng.next(5));
    spec.tools_per_turn = static_cast<int>(rng.next(3));
    spec.plant_redundant_pair = rng.next(3) == 0;
    spec.plant_failure = rng.next(4) == 0;
    spec.outcome = rng.next(2) ? "success" : "";
    sessions.push_back(synth_session(spec, rng));
  }
  return sessions;
}

std::vector<TraceEvent> synth_big_session(uint64_t seed) {
  Rng rng(seed);
  SessionSpec spec;
  spec.key = "synth-big-200";
  // 34 llm turns + 33x5 tool calls + 1 repaired retry = 200 spans.
  spec.turns = 34;
  spec.tools_per_turn = 5;
  spec.plant_failure = true;
  spec.outcome = "success";
  return synth_session(spec, rng);
}

std::vector<std::vector<TraceEvent>> synth_robustness_corpus(uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<TraceEvent>> sessions;
  for (int i = 0; i < 50; ++i) {
    SessionSpec spec;
    spec.key = "synth-robust-" + std::to_string(i);
    // 200 events each: 2 boundary + 33x2 llm + 32x2x2 tool + 2 retry
    // + 2 subagent.
    spec.turns = 33;
    spec.tools_per_turn = 2;
    spec.plant_failure = true;
    spec.spawn_subagent = true;
    spec.child_key = "synth-robust-" + std::to_string(i) + "-child";
    spec.outcome = i % 2 ? "success" : "partial";
    sessions.push_back(synth_session(spec, rng));
  }
  return sessions;
}

SynthCorpus synth_smoke_corpus(uint64_t seed) {
  Rng rng(seed);
  SynthCorpus corpus;
  std::string csv = "task_id,condition,quality,cost_usd\n";

  struct Row {
    const char* suffix;
    const char* outcome;
    bool redundancy;
    bool failure;
  };
  const Row rows[] = {
      {"s1", "success", true, false},  {"s2", "success", true, false},
      {"s3", "success", false, false}, {"s4", "success", false, false},
      {"p1", "partial", false, true},  {"p2", "partial", false, true},
      {"f1", "fail", false, true},     {"f2", "fail", false, false},
  };
  for (const Row& row : rows) {
    SessionSpec spec;
    spec.key = std::string("smoke-") + row.suffix;
    spec.turns = 4;
    spec.tools_per_turn = 1;
    spec.plant_redundant_pair = row.redundancy;
    spec.plant_failure = row.failure;
    spec.outcome = row.outcome;
    if (std::string(row.suffix) == "s1") {
      spec.spawn_subagent = true;
      spec.child_key = spec.key + "-sub";
    }
    corpus.sessions.push_back(synth_session(spec, rng));

    std::string base_q = row.outcome == std::string("success") ? "1.0"
                         : row.outcome == std::string("partial") ? "0.5"
                                                                 : "0";
    auto cost = [&](int cents) {
      return "0.0" + std::to_string(10 + cents);
    };
    csv += spec.key + ",baseline," + base_q + "," +
           cost(static_cast<int>(rng.next(40))) + "\n";
    // Fabricated skill-condition rows: ties on successes, recoveries on
    // some failures, one regression under no_prune.
    for (const char* cond : {"full", "no_prune", "no_cost_attr", "no_cf"}) {
      std::string q = base_q;
      if (std::string(row.suffix) == "f1" && std::string(cond) == "full")
        q = "1.0";
      if (std::string(row.suffix) == "s2" && std::string(cond) == "no_prune")
        q = "0";
      csv += spec.key + "," + cond + "," + q + "," +
             cost(static_cast<int>(rng.next(60))) + "\n";
    }
  }
  // The delegated child ships in a later batch than its parent.
  SessionSpec child;
  child.key = "smoke-s1-sub";
  child.turns = 2;
  child.tools_per_turn = 0;
  child.outcome = "success";
  corpus.sessions.push_back(synth_session(child, rng));

  corpus.outcomes_csv = std::move(csv);
  return corpus;
}

}  // namespace clawtrace
